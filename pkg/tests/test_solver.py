import numpy as np
import pytest

import fracdelay.solver as solver_mod
from fracdelay.fem1d import assemble_mass, l2_norm
from fracdelay.fracops import uniform_weights
from fracdelay.mesh import build_spatial, build_temporal
from fracdelay.powcalc import PowerExpansion
from fracdelay.problems import example1_case1, example1_case2, sin_mode
from fracdelay.solver import (
    ProblemSpec,
    Separable,
    SolverDivergence,
    exact_error,
    init_history,
    solve,
)


def _scalar_recursion(alpha, N, M, p, a, b, g_time, phi_time):
    """The scheme restricted to the sine mode, written out from scratch.

    sin(pi x_j) is a joint eigenvector of the mass and stiffness matrices, so
    every level is c_n sin(pi x_j) with a scalar recursion for c_n.
    """
    h = 1.0 / M
    mu = h * (4 + 2 * np.cos(np.pi * h)) / 6
    kappa = 2 / h * (1 - np.cos(np.pi * h))
    load = 2 * (1 - np.cos(np.pi * h)) / (np.pi**2 * h)  # (sin, phi_j) / sin(pi x_j)
    rho = 1.0 / (2 * N)
    n_steps = 6 * N
    A = uniform_weights(alpha, rho, n_steps)
    hist = [phi_time(-1 + k * rho) for k in range(2 * N + 1)]
    c = list(hist)  # c[n + 2N]
    for n in range(1, n_steps + 1):
        t = n * rho
        a_n = A[:n][::-1]  # a_{n-k}, k = 1..n
        dc = np.diff(c[2 * N: 2 * N + n])
        mem = a_n[:-1] @ dc if n > 1 else 0.0
        delayed = rho * a_n @ np.array(c[1: n + 1])
        rhs = mu * (A[0] * c[-1] - mem + b * delayed) + load * g_time(t)
        c.append(rhs / (A[0] * mu + p * kappa - a * mu))
    return np.array(c)


def test_matches_independent_scalar_recursion():
    alpha, N, M = 0.5, 6, 16
    spec = example1_case1(alpha)
    rec = solve(spec, build_temporal(1.0, 3, N, 1.0), build_spatial(1.0, M))
    c = _scalar_recursion(alpha, N, M, spec.p, spec.a, spec.b, spec.G.time, spec.phi.time)
    s = sin_mode(build_spatial(1.0, M).interior)
    for n in range(-2 * N, 6 * N + 1):
        # the closed-form load differs from 3-point Gauss by ~1e-10
        np.testing.assert_allclose(rec.level(n), c[n + 2 * N] * s, rtol=1e-9, atol=1e-12)


def test_history_levels_are_interpolated():
    spec = example1_case2(0.4)
    tm, sm = build_temporal(1.0, 3, 5, 2.0), build_spatial(1.0, 10)
    rec = init_history(spec, tm, sm)
    for n in range(-10, 1):
        t = tm.t(n)
        np.testing.assert_allclose(rec.level(n), (1 + np.pi * t) * np.sin(np.pi * sm.interior), atol=1e-14)
    assert rec.nodal(0)[0] == 0.0 and rec.nodal(0)[-1] == 0.0


def test_history_must_vanish_on_boundary():
    spec = ProblemSpec(
        p=1.0, a=0.0, b=1.0, alpha=0.5, tau=1.0, K=1,
        phi=lambda x, t: np.ones_like(np.asarray(x, dtype=float)),
        G=Separable(sin_mode, PowerExpansion.constant()),
    )
    with pytest.raises(ValueError):
        init_history(spec, build_temporal(1.0, 1, 4, 1.0), build_spatial(1.0, 8))


def test_uniform_and_graded_paths_agree():
    spec = example1_case1(0.5)
    tm, sm = build_temporal(1.0, 3, 20, 1.0), build_spatial(1.0, 16)
    u = solve(spec, tm, sm, path="uniform")
    g = solve(spec, tm, sm, path="graded")
    assert np.abs(u.U - g.U).max() <= 1e-13
    with pytest.raises(ValueError):
        solve(spec, build_temporal(1.0, 3, 20, 2.0), sm, path="uniform")


def test_error_decreases_with_refinement():
    spec = example1_case1(0.5)
    sm = build_spatial(1.0, 64)
    mass = assemble_mass(sm)
    errs = []
    for N in (10, 20, 40):
        rec = solve(spec, build_temporal(1.0, 3, N, 2.0), sm)
        errs.append(max(exact_error(rec, spec.exact, n) for n in range(1, 6 * N + 1)))
    assert errs[0] > errs[1] > errs[2]
    assert l2_norm(rec.level(6 * 40), mass) > 1.0


def test_sampled_source_converges_to_exact_route():
    # smooth f = t^2 sin(pi x): sampling costs only O(rho)
    sm = build_spatial(1.0, 8)
    exact_route = example1_case2(0.5)
    diffs = []
    for N in (10, 20):
        tm = build_temporal(1.0, 3, N, 1.0)
        a = solve(exact_route, tm, sm)
        b = solve(example1_case2(0.5, source="f-sampled"), tm, sm)
        diffs.append(np.abs(a.U - b.U).max())
    assert diffs[1] < diffs[0] < 0.1
    assert diffs[0] / diffs[1] > 1.6


def test_general_source_matches_separable_source():
    sep = example1_case2(0.5, source="f-sampled")
    gen = ProblemSpec(
        p=sep.p, a=sep.a, b=sep.b, alpha=sep.alpha, tau=sep.tau, K=sep.K, phi=sep.phi,
        f=lambda x, t: sep.f(x, t), f_mode="sampled",
    )
    assert sep.source_route == gen.source_route == "f-sampled"
    tm, sm = build_temporal(1.0, 3, 5, 2.0), build_spatial(1.0, 8)
    np.testing.assert_allclose(solve(gen, tm, sm).U, solve(sep, tm, sm).U, rtol=1e-12, atol=1e-14)


def test_divergence_guard(monkeypatch):
    monkeypatch.setattr(solver_mod, "DIVERGENCE_LIMIT", 0.5)
    with pytest.raises(SolverDivergence):
        solve(example1_case1(0.5), build_temporal(1.0, 3, 4, 1.0), build_spatial(1.0, 8))


def test_problem_validation():
    base = dict(alpha=0.5, tau=1.0, K=1, phi=lambda x, t: 0 * x, G=Separable(sin_mode, PowerExpansion.constant()))
    for bad in (dict(p=0.0, a=-1.0, b=1.0), dict(p=1.0, a=1.0, b=1.0), dict(p=1.0, a=-1.0, b=0.0)):
        with pytest.raises(ValueError):
            ProblemSpec(**bad, **base)
    with pytest.raises(ValueError):
        ProblemSpec(p=1.0, a=-1.0, b=1.0, alpha=1.2, tau=1.0, K=1, phi=base["phi"], G=base["G"])
    with pytest.raises(ValueError):
        ProblemSpec(p=1.0, a=-1.0, b=1.0, alpha=0.5, tau=1.0, K=1, phi=base["phi"])
    spec = example1_case1(0.5)
    with pytest.raises(ValueError):
        solve(spec, build_temporal(1.0, 2, 4, 1.0), build_spatial(1.0, 8))
    with pytest.raises(ValueError):
        example1_case1(0.5, source="nope")

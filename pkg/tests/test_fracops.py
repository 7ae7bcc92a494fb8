import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.special import gamma

from fracdelay.fracops import (
    UniformWeightCache,
    fracint_apply,
    l1_apply,
    omega,
    p_sequence_graded,
    p_sequence_uniform,
    truncation_probe_fracint,
    truncation_probe_l1,
    uniform_weights,
    weight_row,
)
from fracdelay.mesh import build_temporal
from fracdelay.powcalc import PowerExpansion, PowerTerm

alphas = st.floats(0.05, 0.95)


def test_omega_values_and_domain():
    assert omega(1.0, 3.7) == pytest.approx(1.0)
    assert omega(2.0, 3.0) == pytest.approx(3.0)
    assert omega(0.5, 4.0) == pytest.approx(0.5 / gamma(0.5))
    with pytest.raises(ValueError):
        omega(0.5, 0.0)
    with pytest.raises(ValueError):
        omega(0.0, 1.0)


def test_uniform_weights_frozen():
    # a_0 = 1/Gamma(1.5), a_1 = (2^0.5 - 1)/Gamma(1.5)
    a = uniform_weights(0.5, 1.0, 2)
    g = gamma(1.5)
    np.testing.assert_allclose(a, [1.0 / g, (np.sqrt(2.0) - 1.0) / g], rtol=1e-13)
    np.testing.assert_allclose(a, [1.12838, 0.46739], atol=1e-5)


def test_p_sequence_frozen():
    P = p_sequence_uniform(uniform_weights(0.5, 1.0, 2), 0.5).values
    # P_1 = Gamma(1.5) (2 - sqrt 2)
    np.testing.assert_allclose(P, [gamma(1.5), gamma(1.5) * (2.0 - np.sqrt(2.0))], rtol=1e-13)
    np.testing.assert_allclose(P, [0.886227, 0.519140], atol=1e-6)


@given(alpha=alphas, n=st.integers(1, 60), r=st.floats(1.0, 3.0))
@settings(max_examples=60, deadline=None)
def test_telescoping(alpha, n, r):
    mesh = build_temporal(1.0, 2, 15, r)
    w = weight_row(mesh, alpha, n)
    assert np.all(w.a > 0)
    assert w.quad.sum() == pytest.approx(omega(2.0 - alpha, mesh.t(n)), rel=1e-12)


@given(alpha=alphas, n=st.integers(2, 60))
@settings(max_examples=40, deadline=None)
def test_weights_decrease_towards_past_on_uniform_mesh(alpha, n):
    w = weight_row(build_temporal(1.0, 2, 15, 1.0), alpha, n)
    assert np.all(np.diff(w.a) > 0)  # a[k-1] = a_{n-k} grows with k


@given(alpha=alphas, n=st.integers(1, 80))
@settings(max_examples=40, deadline=None)
def test_uniform_cache_matches_general_rows(alpha, n):
    mesh = build_temporal(1.0, 2, 20, 1.0)
    cache = UniformWeightCache(alpha, mesh.step(1))
    a, b = cache.row(n), weight_row(mesh, alpha, n)
    np.testing.assert_allclose(a.a, b.a, rtol=1e-11)
    np.testing.assert_allclose(a.rho, b.rho, rtol=1e-13)


def test_weight_row_validation():
    mesh = build_temporal(1.0, 1, 4, 1.0)
    for bad in (0, 9):
        with pytest.raises(ValueError):
            weight_row(mesh, 0.5, bad)
    with pytest.raises(ValueError):
        weight_row(mesh, 1.0, 1)


def test_l1_exact_on_affine():
    mesh = build_temporal(1.0, 3, 6, 2.5)
    t = mesh.positive_times
    for n in (1, 7, 20, 36):
        w = weight_row(mesh, 0.4, n)
        assert l1_apply(w, 1.0 - 2.0 * t[: n + 1]) == pytest.approx(-2.0 * omega(1.6, t[n]), rel=1e-13)
    with pytest.raises(ValueError):
        l1_apply(weight_row(mesh, 0.4, 3), t[:3])


def test_fracint_against_quadrature():
    # right-rectangle rule integrates piecewise constant data exactly
    alpha, n = 0.35, 9
    mesh = build_temporal(1.0, 1, 6, 2.0)
    t = mesh.positive_times
    v = np.cos(np.arange(1, n + 1))
    tn = t[n]

    def exact():
        total = 0.0
        for k in range(1, n + 1):
            val, _ = quad(lambda s: (tn - s) ** (-alpha), t[k - 1], t[k], epsabs=1e-14, limit=200)
            total += v[k - 1] * val
        return total / gamma(1.0 - alpha)

    assert fracint_apply(weight_row(mesh, alpha, n), v) == pytest.approx(exact(), rel=1e-10)


@given(alpha=alphas, n=st.integers(1, 150))
@settings(max_examples=40, deadline=None)
def test_p_identity_and_bound(alpha, n):
    rho = 1.0 / 150
    a = uniform_weights(alpha, rho, n)
    P = p_sequence_uniform(a, alpha).values
    assert np.all(P > 0)
    np.testing.assert_allclose(np.convolve(P, a)[:n], 1.0, atol=1e-10)
    assert P.sum() <= omega(1.0 + alpha, n * rho) + 1e-10


def test_p_sequence_rejects_bad_input():
    with pytest.raises(ValueError):
        p_sequence_uniform([])
    with pytest.raises(ValueError):
        p_sequence_uniform([1.0, 2.0])
    with pytest.raises(ValueError):
        p_sequence_uniform([1.0, -0.1])


@given(alpha=alphas, n=st.integers(1, 40))
@settings(max_examples=25, deadline=None)
def test_graded_kernel_reduces_to_uniform(alpha, n):
    mesh = build_temporal(1.0, 2, 10, 1.0)
    rows = [weight_row(mesh, alpha, i) for i in range(1, n + 1)]
    Pbar = p_sequence_graded(rows).values
    P = p_sequence_uniform(uniform_weights(alpha, mesh.step(1), n), alpha).values
    np.testing.assert_allclose(Pbar, P, rtol=1e-9)


def test_graded_kernel_validates_rows():
    m1 = build_temporal(1.0, 2, 10, 2.0)
    m2 = build_temporal(1.0, 2, 10, 3.0)
    with pytest.raises(ValueError):
        p_sequence_graded([weight_row(m1, 0.5, 1), weight_row(m2, 0.5, 2)])
    with pytest.raises(ValueError):
        p_sequence_graded([weight_row(m1, 0.5, 2)])
    with pytest.raises(ValueError):
        p_sequence_graded([])


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.7])
def test_l1_probe_order(alpha):
    target = PowerExpansion([PowerTerm(1.0, 0.0, alpha)])
    res = truncation_probe_l1(alpha, 1.0, [32, 64, 128], target)
    assert res.last_rate == pytest.approx(min(2 - alpha, 1 + alpha), abs=0.1)


def test_l1_probe_graded_path_agrees_with_uniform_path():
    target = PowerExpansion([PowerTerm(1.0, 0.0, 0.5)])
    a = truncation_probe_l1(0.5, 1.0, [16, 32], target, uniform_path=True)
    b = truncation_probe_l1(0.5, 1.0, [16, 32], target, uniform_path=False)
    np.testing.assert_allclose(a.errors, b.errors, rtol=1e-9)


def test_fracint_probe_order():
    res = truncation_probe_fracint(0.5, 1.0, [16, 32, 64], PowerExpansion.polynomial([1.0, 1.0]))
    assert res.last_rate == pytest.approx(1.0, abs=0.1)

"""Fully discrete L1 / finite element scheme for the delayed subdiffusion problem.

At each level ``n = 1 .. 2KN`` the scheme solves

    (a0 M + B) U^n = M [a0 U^{n-1} - sum_{k<n} a_{n-k} (U^k - U^{k-1})]
                     + b M sum_{k<=n} rho_k a_{n-k} U^{k-2N} + (G^n, phi_j)

where ``M`` is the mass matrix and ``B`` the matrix of
``p (u', v') - a (u, v)``.  The delayed sum reads only levels
``k - 2N <= n - 2N``, so it never touches the unknown ``U^n``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Literal, Optional, Union

import numpy as np

from .fem1d import (
    TriDiag,
    TridiagFactor,
    assemble_B,
    assemble_mass,
    assemble_stiffness,
    interpolate,
    l2_norm,
    load_vector,
)
from .fracops import UniformWeightCache, WeightRow, weight_row
from .mesh import SpatialMesh, TemporalMesh
from .powcalc import PowerExpansion, rebase, rlint_of_power

__all__ = [
    "Separable",
    "ProblemSpec",
    "SolveRecord",
    "SolverDivergence",
    "init_history",
    "step",
    "solve",
]

log = logging.getLogger(__name__)

DIVERGENCE_LIMIT = 1e10

TimeProfile = Union[PowerExpansion, Callable[[np.ndarray], np.ndarray]]


class SolverDivergence(ArithmeticError):
    """The discrete solution blew up; the scheme is stable, so this means a bug or bad data."""


@dataclass(frozen=True)
class Separable:
    """``space(x) * time(t)``."""

    space: Callable[[np.ndarray], np.ndarray]
    time: TimeProfile

    def __call__(self, x, t):
        return np.asarray(self.space(x)) * np.asarray(self.time(t))

    @property
    def closed_form(self) -> bool:
        return isinstance(self.time, PowerExpansion)


FieldFn = Union[Separable, Callable[[np.ndarray, float], np.ndarray]]


@dataclass(frozen=True)
class ProblemSpec:
    """Coefficients and data of the delayed problem on ``(0, L) x (0, K*tau]``.

    Exactly one of ``G`` (right-hand side of the transformed equation) or
    ``f`` (original source) must be given.  A closed-form separable ``f`` is
    turned into ``G`` exactly unless ``f_mode == "sampled"``, in which case
    ``G^n`` is approximated by the right-rectangle rule on samples
    ``f(t_1) .. f(t_n)``.
    """

    p: float
    a: float
    b: float
    alpha: float
    tau: float
    K: int
    phi: FieldFn
    L: float = 1.0
    G: Optional[Separable] = None
    f: Optional[FieldFn] = None
    f_mode: Literal["exact", "sampled"] = "exact"
    exact: Optional[Separable] = None
    name: str = "custom"

    def __post_init__(self):
        if not self.p > 0:
            raise ValueError(f"p must be positive, got {self.p}")
        if self.a > 0:
            raise ValueError(f"a must be <= 0, got {self.a}")
        if self.b == 0:
            raise ValueError("b must be nonzero")
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not self.tau > 0 or int(self.K) != self.K or self.K < 1:
            raise ValueError("need tau > 0 and a positive integer K")
        if (self.G is None) == (self.f is None):
            raise ValueError("give exactly one of G or f")
        if self.f_mode not in ("exact", "sampled"):
            raise ValueError(f"unknown f_mode {self.f_mode!r}")

    @property
    def source_route(self) -> str:
        if self.G is not None:
            return "G"
        if self.f_mode == "exact" and isinstance(self.f, Separable) and self.f.closed_form:
            return "f-exact"
        return "f-sampled"


@dataclass
class SolveRecord:
    tmesh: TemporalMesh
    smesh: SpatialMesh
    U: np.ndarray  # row n + 2N holds level n, interior nodes only
    max_norms: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def level(self, n: int) -> np.ndarray:
        return self.U[n + self.tmesh.offset]

    def nodal(self, n: int) -> np.ndarray:
        """Values at all nodes ``0 .. M`` including the zero boundary."""
        out = np.zeros(self.smesh.M + 1)
        out[1:-1] = self.level(n)
        return out

    @property
    def levels(self) -> range:
        return range(-self.tmesh.offset, self.tmesh.n_steps + 1)


def _check_meshes(spec: ProblemSpec, tmesh: TemporalMesh, smesh: SpatialMesh) -> None:
    if tmesh.tau != spec.tau or tmesh.K != spec.K:
        raise ValueError("temporal mesh was not built for this problem's tau and K")
    if not np.isclose(smesh.L, spec.L, rtol=1e-14, atol=0):
        raise ValueError("spatial mesh length does not match the problem")


def init_history(spec: ProblemSpec, tmesh: TemporalMesh, smesh: SpatialMesh) -> SolveRecord:
    """Record with levels ``-2N .. 0`` set to the interpolated history."""
    _check_meshes(spec, tmesh, smesh)
    U = np.zeros((tmesh.points.size, smesh.M - 1))
    for n in range(-2 * tmesh.N, 1):
        t = float(tmesh.t(n))
        edge = np.abs(np.asarray(spec.phi(np.array([0.0, smesh.L]), t), dtype=float))
        if np.any(edge > 1e-12):
            raise ValueError(f"history violates the zero boundary condition at t={t}")
        U[n + tmesh.offset] = interpolate(lambda x: spec.phi(x, t), smesh)
    return SolveRecord(tmesh=tmesh, smesh=smesh, U=U)


class _Loads:
    """Produces ``(G^n, phi_j)`` for every level by the configured route."""

    def __init__(self, spec: ProblemSpec, tmesh: TemporalMesh, smesh: SpatialMesh):
        self.route = spec.source_route
        t = tmesh.positive_times
        if self.route == "G":
            self._space = load_vector(spec.G.space, smesh)
            self._scale = np.asarray(spec.G.time(t[1:]), dtype=float)
        elif self.route == "f-exact":
            g = rlint_of_power(1.0 - spec.alpha, rebase(spec.f.time, 0.0))
            self._space = load_vector(spec.f.space, smesh)
            self._scale = np.asarray(g(t[1:]), dtype=float)
        elif isinstance(spec.f, Separable):
            self._space = load_vector(spec.f.space, smesh)
            self._samples = np.asarray(spec.f.time(t[1:]), dtype=float)
        else:
            # general f(x, t): one load vector per sample time
            self._space = None
            self._samples = np.stack(
                [load_vector(lambda x, tk=tk: spec.f(x, tk), smesh) for tk in t[1:]]
            )

    def __call__(self, n: int, w: WeightRow) -> np.ndarray:
        if self.route in ("G", "f-exact"):
            return self._scale[n - 1] * self._space
        if self._space is not None:
            return (w.quad @ self._samples[:n]) * self._space
        return w.quad @ self._samples[:n]


@dataclass
class _Operators:
    mass: TriDiag
    B: TriDiag


def step(
    n: int,
    record: SolveRecord,
    spec: ProblemSpec,
    w: WeightRow,
    load: np.ndarray,
    ops: Optional[_Operators] = None,
    factor: Optional[TridiagFactor] = None,
    diffs: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Advance to level ``n``; levels ``< n`` of ``record`` must be filled.

    ``load`` is the vector ``(G^n, phi_j)``.  Passing a prebuilt ``factor`` of
    ``a0 M + B`` skips refactorisation, and ``diffs`` (row ``k-1`` holding
    ``U^k - U^{k-1}``) avoids recomputing the differences.
    """
    tm = record.tmesh
    N2 = 2 * tm.N
    if w.n != n:
        raise ValueError(f"weight row is for level {w.n}, not {n}")
    if ops is None:
        mass = assemble_mass(record.smesh)
        ops = _Operators(mass, assemble_B(spec.p, spec.a, mass, assemble_stiffness(record.smesh)))
    off = tm.offset
    U = record.U
    a0 = w.a0
    vec = a0 * U[off + n - 1]
    if n > 1:
        # a[k-1] = a_{n-k}, k = 1..n-1, applied to U^k - U^{k-1}
        if diffs is None:
            dU = U[off + 1: off + n] - U[off: off + n - 1]
        else:
            dU = diffs[: n - 1]
        vec = vec - w.a[:-1] @ dU
    # delayed levels k - 2N for k = 1..n never exceed n - 2N < n
    assert n - N2 < n
    vec = vec + spec.b * (w.quad @ U[off + 1 - N2: off + n + 1 - N2])
    rhs = ops.mass.matvec(vec) + load
    if factor is None:
        factor = TridiagFactor(a0 * ops.mass + ops.B)
    return factor.solve(rhs)


def solve(
    spec: ProblemSpec,
    tmesh: TemporalMesh,
    smesh: SpatialMesh,
    *,
    path: Literal["auto", "uniform", "graded"] = "auto",
) -> SolveRecord:
    """March the scheme over all levels ``1 .. 2KN``.

    ``path="uniform"`` reuses one weight sequence and one factorisation
    (valid only for ``r = 1``); ``"graded"`` recomputes both per level;
    ``"auto"`` picks the uniform path whenever the mesh allows it.
    """
    if path == "auto":
        path = "uniform" if tmesh.is_uniform else "graded"
    if path == "uniform" and not tmesh.is_uniform:
        raise ValueError("uniform path requires r = 1")
    if path not in ("uniform", "graded"):
        raise ValueError(f"unknown path {path!r}")

    record = init_history(spec, tmesh, smesh)
    mass = assemble_mass(smesh)
    ops = _Operators(mass, assemble_B(spec.p, spec.a, mass, assemble_stiffness(smesh)))
    loads = _Loads(spec, tmesh, smesh)
    n_steps = tmesh.n_steps
    off = tmesh.offset

    # running differences U^k - U^{k-1}, k = 1..n
    dU = np.zeros((n_steps, smesh.M - 1))
    norms = np.zeros(n_steps + 1)
    norms[0] = np.abs(record.U[off]).max(initial=0.0)

    cache = factor = None
    if path == "uniform":
        cache = UniformWeightCache(spec.alpha, tmesh.step(1), n_steps)
        factor = TridiagFactor(cache.values[0] * mass + ops.B)

    U = record.U
    for n in range(1, n_steps + 1):
        w = cache.row(n) if cache is not None else weight_row(tmesh, spec.alpha, n)
        Un = step(n, record, spec, w, loads(n, w), ops=ops, factor=factor, diffs=dU)
        U[off + n] = Un
        dU[n - 1] = Un - U[off + n - 1]
        norms[n] = np.abs(Un).max(initial=0.0)
        if not np.isfinite(norms[n]) or norms[n] > DIVERGENCE_LIMIT:
            raise SolverDivergence(f"|U^{n}|_inf = {norms[n]:.3e} exceeds {DIVERGENCE_LIMIT:g}")
    log.debug("solved %s: N=%d r=%g M=%d", spec.name, tmesh.N, tmesh.r, smesh.M)
    record.max_norms = norms
    return record


def exact_error(record: SolveRecord, exact: Separable, n: int) -> float:
    """L2 norm of ``U^n`` minus the nodal interpolant of the exact solution."""
    t = float(record.tmesh.t(n))
    mass = assemble_mass(record.smesh)
    truth = interpolate(lambda x: exact(x, t), record.smesh)
    return l2_norm(record.level(n) - truth, mass)

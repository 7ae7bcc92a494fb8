"""Discrete fractional operators on a temporal mesh.

Weights of the L1 formula for the Caputo derivative,

    a^{(n)}_{n-k} = [w(t_n - t_{k-1}) - w(t_n - t_k)] / rho_k,
    w = omega_{2-alpha},

are shared with the right-rectangle rule for the order ``1 - alpha``
Riemann-Liouville integral (which uses ``rho_k * a^{(n)}_{n-k}``).  The
complementary kernels ``P`` and ``Pbar`` satisfy discrete convolution
identities that the stability analysis relies on; they are exposed for
verification.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gamma

from .mesh import TemporalMesh, build_temporal
from .powcalc import PowerExpansion, caputo_of_power, rebase, rlint_of_power

__all__ = [
    "omega",
    "WeightRow",
    "KernelSeq",
    "weight_row",
    "uniform_weights",
    "UniformWeightCache",
    "l1_apply",
    "fracint_apply",
    "p_sequence_uniform",
    "p_sequence_graded",
    "ProbeResult",
    "truncation_probe_l1",
    "truncation_probe_fracint",
]


def omega(alpha: float, t):
    """Kernel ``t**(alpha-1) / Gamma(alpha)`` for ``t > 0``."""
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0):
        raise ValueError("omega is defined for t > 0 only")
    out = t_arr ** (alpha - 1.0) / gamma(alpha)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class WeightRow:
    """L1 weights and steps for level ``n``; ``a[k-1] = a^{(n)}_{n-k}``."""

    n: int
    alpha: float
    a: np.ndarray
    rho: np.ndarray

    @property
    def a0(self) -> float:
        return float(self.a[-1])

    @property
    def quad(self) -> np.ndarray:
        """Right-rectangle weights ``rho_k * a^{(n)}_{n-k}``."""
        return self.rho * self.a


def weight_row(mesh: TemporalMesh, alpha: float, n: int) -> WeightRow:
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if int(n) != n or not 1 <= n <= mesh.n_steps:
        raise ValueError(f"level n={n} outside 1..{mesh.n_steps}")
    t = mesh.positive_times[: n + 1]
    rho = np.diff(t)
    a = _power_gap(1.0 - alpha, t[n] - t[1:], rho) / (rho * gamma(2.0 - alpha))
    return WeightRow(n=int(n), alpha=float(alpha), a=a, rho=rho)


def _power_gap(g: float, y: np.ndarray, d: np.ndarray) -> np.ndarray:
    """``(y + d)**g - y**g`` without cancellation (``y >= 0``, ``d > 0``)."""
    out = d**g  # y == 0
    pos = y > 0
    yp = y[pos]
    out[pos] = yp**g * np.expm1(g * np.log1p(d[pos] / yp))
    return out


def uniform_weights(alpha: float, rho: float, count: int) -> np.ndarray:
    """``a_0 .. a_{count-1}`` on a uniform mesh of step ``rho``."""
    j = np.arange(count, dtype=float)
    gap = _power_gap(1.0 - alpha, j, np.ones(count))
    return gap * rho ** (-alpha) / gamma(2.0 - alpha)


class UniformWeightCache:
    """Weights ``a_j`` for a uniform mesh, grown on demand.

    Not thread-safe while growing; call :meth:`reserve` up front when shared.
    """

    def __init__(self, alpha: float, rho: float, size: int = 0):
        self.alpha = float(alpha)
        self.rho = float(rho)
        self._a = uniform_weights(alpha, rho, max(size, 1))

    def reserve(self, size: int) -> None:
        if size > self._a.size:
            self._a = uniform_weights(self.alpha, self.rho, size)

    def row(self, n: int) -> WeightRow:
        """Same layout as :func:`weight_row`: ``a[k-1] = a_{n-k}``."""
        self.reserve(n)
        return WeightRow(
            n=n, alpha=self.alpha, a=self._a[:n][::-1].copy(), rho=np.full(n, self.rho)
        )

    @property
    def values(self) -> np.ndarray:
        return self._a


def l1_apply(w: WeightRow, u: Sequence[float]) -> float:
    """L1 approximation of the Caputo derivative at ``t_n`` from ``u^0..u^n``."""
    u = np.asarray(u, dtype=float)
    if u.shape[0] != w.n + 1:
        raise ValueError(f"expected {w.n + 1} samples u^0..u^n, got {u.shape[0]}")
    return float(w.a @ np.diff(u, axis=0))


def fracint_apply(w: WeightRow, v: Sequence[float]) -> float:
    """Right-rectangle rule for ``I^{1-alpha} v`` at ``t_n`` from ``v^1..v^n``."""
    v = np.asarray(v, dtype=float)
    if v.shape[0] != w.n:
        raise ValueError(f"expected {w.n} samples v^1..v^n, got {v.shape[0]}")
    return float(w.quad @ v)


@dataclass(frozen=True)
class KernelSeq:
    """``values[m]`` is ``P_m`` (uniform) or ``Pbar^{(n)}_m`` (graded), m = 0..n-1."""

    alpha: float
    n: int
    values: np.ndarray

    def by_level(self) -> np.ndarray:
        """Values indexed by ``j = 1..n`` (entry ``j-1`` holds the kernel at ``n - j``)."""
        return self.values[::-1]


def p_sequence_uniform(a: Sequence[float], alpha: float = float("nan")) -> KernelSeq:
    """Complementary kernel ``P_0 .. P_{n-1}`` of uniform L1 weights ``a_0 .. a_{n-1}``.

    ``P_0 = 1/a_0`` and ``P_m = (1/a_0) sum_{i=1}^{m} P_{m-i} (a_{i-1} - a_i)``.
    """
    a = np.asarray(a, dtype=float)
    n = a.size
    if n == 0:
        raise ValueError("need at least one weight")
    if np.any(a <= 0) or np.any(np.diff(a) >= 0):
        raise ValueError("uniform weights must be positive and strictly decreasing")
    d = -np.diff(a)  # d[i-1] = a_{i-1} - a_i
    P = np.empty(n)
    P[0] = 1.0 / a[0]
    for m in range(1, n):
        # sum_{i=1}^{m} P_{m-i} d_i
        P[m] = P[m - 1::-1] @ d[:m] / a[0]
    return KernelSeq(alpha=alpha, n=n, values=P)


def p_sequence_graded(rows: Sequence[WeightRow]) -> KernelSeq:
    """``Pbar^{(n)}_{n-j}`` for ``j = 1..n`` from weight rows of levels 1..n.

    ``Pbar^{(n)}_0 = 1/a_0^{(n)}`` and, for ``j < n``,
    ``Pbar^{(n)}_{n-j} = (1/a_0^{(j)}) sum_{i=j+1}^{n} Pbar^{(n)}_{n-i}
    (a^{(i)}_{i-j-1} - a^{(i)}_{i-j})``.
    """
    n = len(rows)
    if n == 0:
        raise ValueError("need at least one weight row")
    alpha = rows[0].alpha
    for i, row in enumerate(rows, start=1):
        if row.n != i or row.a.size != i or row.alpha != alpha:
            raise ValueError(f"row {i} is inconsistent (n={row.n}, alpha={row.alpha})")
        if i > 1 and not np.array_equal(row.rho[:-1], rows[i - 2].rho):
            raise ValueError(f"row {i} does not come from the same mesh as row {i - 1}")
    # by_j[j-1] = Pbar^{(n)}_{n-j}
    # A[i-1, k-1] = a^{(i)}_{i-k}
    A = np.zeros((n, n))
    for i, row in enumerate(rows, start=1):
        A[i - 1, :i] = row.a
    by_j = np.zeros(n)
    by_j[n - 1] = 1.0 / rows[n - 1].a0
    for j in range(n - 1, 0, -1):
        # a^{(i)}_{i-j-1} sits at column j, a^{(i)}_{i-j} at column j-1, i = j+1..n
        by_j[j - 1] = by_j[j:] @ (A[j:, j] - A[j:, j - 1]) / rows[j - 1].a0
    return KernelSeq(alpha=alpha, n=n, values=by_j[::-1].copy())


# ---------------------------------------------------------------------------
# truncation-order probes


@dataclass
class ProbeResult:
    Ns: list[int]
    errors: list[float]
    rates: list[float]

    @property
    def last_rate(self) -> float:
        return self.rates[-1] if self.rates else float("nan")


def _rates(errors: Sequence[float]) -> list[float]:
    out = []
    for e0, e1 in zip(errors[:-1], errors[1:]):
        out.append(float(np.log2(e0 / e1)) if e0 > 0 and e1 > 0 else float("nan"))
    return out


def truncation_probe_l1(
    alpha: float,
    r: float,
    Ns: Sequence[int],
    target: PowerExpansion,
    *,
    tau: float = 1.0,
    K: int = 1,
    window: int = 1,
    weighted: bool = True,
    uniform_path: bool = True,
) -> ProbeResult:
    """Local L1 truncation error on delay window ``window`` for each ``N``.

    The error at level ``n`` is ``|D^alpha u^n - C D^alpha u(t_n)|`` for the
    closed-form ``target``.  With ``weighted=True`` each error is multiplied
    by ``t_n ** min(2-alpha, 1+alpha)`` (on the first window), which turns the
    pointwise bound ``(rho/t_n)^q`` into a uniform ``rho^q`` and makes the
    maximum over the window decay at the predicted order ``q``.
    """
    exact = caputo_of_power(alpha, rebase(target, 0.0))
    q = min(2.0 - alpha, 1.0 + alpha)
    errors = []
    for N in Ns:
        mesh = build_temporal(tau, K, N, r)
        t = mesh.positive_times
        u = target(t)
        lo, hi = 2 * (window - 1) * N + 1, 2 * window * N
        cache = UniformWeightCache(alpha, mesh.step(1), hi) if (uniform_path and mesh.is_uniform) else None
        worst = 0.0
        for n in range(lo, hi + 1):
            w = cache.row(n) if cache is not None else weight_row(mesh, alpha, n)
            err = abs(l1_apply(w, u[: n + 1]) - exact(t[n]))
            if weighted:
                err *= (t[n] - (window - 1) * tau) ** q
            worst = max(worst, err)
        errors.append(worst)
    return ProbeResult(list(Ns), errors, _rates(errors))


def truncation_probe_fracint(
    alpha: float,
    r: float,
    Ns: Sequence[int],
    history: PowerExpansion,
    *,
    tau: float = 1.0,
    K: int = 3,
) -> ProbeResult:
    """Max error of ``J^{1-alpha} u^{n-2N}`` against ``I^{1-alpha}[u(. - tau)](t_n)``.

    ``history`` is the delayed function ``v(t) = u(t - tau)`` on ``(0, K*tau]``
    in shifted-power form with shifts >= 0.
    """
    v = rebase(history, 0.0)
    exact = rlint_of_power(1.0 - alpha, v)
    errors = []
    for N in Ns:
        mesh = build_temporal(tau, K, N, r)
        t = mesh.positive_times
        # v^k = u(t_{k-2N}) = v(t_k); right-endpoint sampling
        samples = v(t[1:])
        worst = 0.0
        for n in range(1, mesh.n_steps + 1):
            w = weight_row(mesh, alpha, n)
            worst = max(worst, abs(fracint_apply(w, samples[:n]) - exact(t[n])))
        errors.append(worst)
    return ProbeResult(list(Ns), errors, _rates(errors))

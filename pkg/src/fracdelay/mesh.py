"""Temporal and spatial meshes.

The temporal grid covers ``[-tau, K*tau]`` and is graded with exponent ``r``
towards both ends of every delay window ``[(i-1)*tau, i*tau]``.  Indices run
from ``-2N`` to ``2KN``; window ``i`` owns indices ``2(i-1)N .. 2iN``.
With ``r = 1`` the grid is uniform with step ``tau / (2N)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["TemporalMesh", "SpatialMesh", "build_temporal", "build_spatial"]


@dataclass(frozen=True)
class TemporalMesh:
    tau: float
    K: int
    N: int
    r: float
    points: np.ndarray = field(repr=False)

    @property
    def offset(self) -> int:
        """Array position of index ``n = 0``."""
        return 2 * self.N

    @property
    def n_steps(self) -> int:
        """Number of levels ``n = 1 .. 2KN`` on ``(0, K*tau]``."""
        return 2 * self.K * self.N

    @property
    def is_uniform(self) -> bool:
        return self.r == 1

    def t(self, n):
        """Time(s) at level index ``n`` (scalar or integer array, may be negative)."""
        return self.points[np.asarray(n) + self.offset]

    def step(self, n: int) -> float:
        """``rho_n = t_n - t_{n-1}``."""
        return float(self.t(n) - self.t(n - 1))

    @property
    def steps(self) -> np.ndarray:
        """``rho_1 .. rho_{2KN}``."""
        return np.diff(self.points[self.offset:])

    @property
    def positive_times(self) -> np.ndarray:
        """``t_0 .. t_{2KN}``."""
        return self.points[self.offset:]

    def window_of(self, n: int) -> int:
        """Delay window ``i >= 1`` containing level ``n >= 1``."""
        return (n - 1) // (2 * self.N) + 1

    def is_refinement_of(self, coarse: "TemporalMesh") -> int:
        """Return the stride ``m`` such that ``self.t(m*n) == coarse.t(n)``, or 0.

        Only power-of-two ratios ``self.N / coarse.N`` are accepted.
        """
        if (self.tau, self.K, self.r) != (coarse.tau, coarse.K, coarse.r):
            return 0
        if self.N % coarse.N:
            return 0
        m = self.N // coarse.N
        if m & (m - 1):
            return 0
        sub = self.points[::m]
        if sub.shape != coarse.points.shape:
            return 0
        if not np.allclose(sub, coarse.points, rtol=0.0, atol=1e-13 * max(1.0, self.K * self.tau)):
            return 0
        return m


def _window_profile(N: int, r: float) -> np.ndarray:
    """Offsets from the window start, in units of tau, for local indices 0..2N."""
    m = np.arange(2 * N + 1, dtype=float)
    left = 0.5 * (m / N) ** r
    right = 1.0 - 0.5 * ((2 * N - m) / N) ** r
    return np.where(m < N, left, right)


def build_temporal(tau: float, K: int, N: int, r: float) -> TemporalMesh:
    """Symmetric graded time mesh on ``[-tau, K*tau]``.

    Each point is evaluated from the closed form (no accumulation of steps),
    and window endpoints are pinned to ``i*tau`` exactly.
    """
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    if int(K) != K or K < 1:
        raise ValueError(f"K must be a positive integer, got {K}")
    if int(N) != N or N < 2:
        raise ValueError(f"N must be an integer >= 2, got {N}")
    if not r >= 1:
        raise ValueError(f"grading exponent r must be >= 1, got {r}")
    K, N = int(K), int(N)
    tau, r = float(tau), float(r)

    profile = _window_profile(N, r)
    pts = np.empty(2 * (K + 1) * N + 1)
    # window i = 0 is the history interval [-tau, 0]
    for i in range(K + 1):
        start = 2 * i * N
        pts[start:start + 2 * N + 1] = (i - 1) * tau + tau * profile
        pts[start] = (i - 1) * tau
        pts[start + 2 * N] = i * tau
    return TemporalMesh(tau=tau, K=K, N=N, r=r, points=pts)


@dataclass(frozen=True)
class SpatialMesh:
    L: float
    M: int

    @property
    def h(self) -> float:
        return self.L / self.M

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.L, self.M + 1)

    @property
    def interior(self) -> np.ndarray:
        return self.nodes[1:-1]


def build_spatial(L: float, M: int) -> SpatialMesh:
    if not L > 0:
        raise ValueError(f"domain length must be positive, got {L}")
    if int(M) != M or M < 2:
        raise ValueError(f"M must be an integer >= 2, got {M}")
    return SpatialMesh(L=float(L), M=int(M))

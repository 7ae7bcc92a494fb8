"""Piecewise-linear finite elements on a uniform 1D mesh, zero Dirichlet data.

Matrices act on interior nodes ``1 .. M-1`` only and are stored as three
diagonals.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg.lapack import dgttrf, dgttrs

from .mesh import SpatialMesh

__all__ = [
    "TriDiag",
    "SingularSystemError",
    "assemble_mass",
    "assemble_stiffness",
    "assemble_B",
    "load_vector",
    "interpolate",
    "l2_norm",
    "tridiag_solve",
    "TridiagFactor",
]

# 3-point Gauss-Legendre on [0, 1]
_GL_X = 0.5 + 0.5 * np.array([-np.sqrt(0.6), 0.0, np.sqrt(0.6)])
_GL_W = np.array([5.0, 8.0, 5.0]) / 18.0


class SingularSystemError(ArithmeticError):
    """Raised when a tridiagonal system is not safely solvable without pivoting."""


@dataclass(frozen=True)
class TriDiag:
    """Symmetric-or-not tridiagonal matrix; ``sub[i]`` couples rows ``i+1`` and ``i``."""

    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray

    @property
    def size(self) -> int:
        return self.diag.size

    def __add__(self, other: "TriDiag") -> "TriDiag":
        return TriDiag(self.sub + other.sub, self.diag + other.diag, self.sup + other.sup)

    def __mul__(self, k: float) -> "TriDiag":
        return TriDiag(k * self.sub, k * self.diag, k * self.sup)

    __rmul__ = __mul__

    def matvec(self, v: np.ndarray) -> np.ndarray:
        """``A @ v``; ``v`` may carry extra trailing columns."""
        v = np.asarray(v, dtype=float)
        out = self.diag.reshape((-1,) + (1,) * (v.ndim - 1)) * v
        if self.size > 1:
            out[1:] += self.sub.reshape((-1,) + (1,) * (v.ndim - 1)) * v[:-1]
            out[:-1] += self.sup.reshape((-1,) + (1,) * (v.ndim - 1)) * v[1:]
        return out

    __matmul__ = matvec

    def todense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.sub, -1) + np.diag(self.sup, 1)

    @property
    def is_symmetric(self) -> bool:
        return np.array_equal(self.sub, self.sup)

    def dominance_margin(self) -> float:
        """Smallest ``|d_i| - sum_j |off_ij|`` over rows."""
        off = np.zeros(self.size)
        off[1:] += np.abs(self.sub)
        off[:-1] += np.abs(self.sup)
        return float(np.min(np.abs(self.diag) - off))


def _tri(m: SpatialMesh, off: float, mid: float) -> TriDiag:
    n = m.M - 1
    return TriDiag(np.full(n - 1, off), np.full(n, mid), np.full(n - 1, off))


def assemble_mass(m: SpatialMesh) -> TriDiag:
    h = m.h
    return _tri(m, h / 6.0, 4.0 * h / 6.0)


def assemble_stiffness(m: SpatialMesh) -> TriDiag:
    h = m.h
    return _tri(m, -1.0 / h, 2.0 / h)


def assemble_B(p: float, a: float, mass: TriDiag, stiff: TriDiag) -> TriDiag:
    """Matrix of ``B(u, v) = p (u', v') - a (u, v)``."""
    if not p > 0:
        raise ValueError(f"diffusivity p must be positive, got {p}")
    if a > 0:
        raise ValueError(f"reaction coefficient a must be <= 0, got {a}")
    return p * stiff + (-a) * mass


def load_vector(profile: Callable[[np.ndarray], np.ndarray], m: SpatialMesh) -> np.ndarray:
    """``int profile * phi_j dx`` for interior hats, 3-point Gauss per element."""
    nodes = m.nodes
    h = m.h
    xq = nodes[:-1, None] + h * _GL_X[None, :]  # (M, 3)
    fq = np.asarray(profile(xq), dtype=float) * np.ones_like(xq)
    # hat j rises on element j-1 and falls on element j
    rising = h * (fq * (_GL_W * _GL_X)).sum(axis=1)
    falling = h * (fq * (_GL_W * (1.0 - _GL_X))).sum(axis=1)
    return rising[:-1] + falling[1:]


def interpolate(fn: Callable[[np.ndarray], np.ndarray], m: SpatialMesh) -> np.ndarray:
    """Nodal values at the interior nodes."""
    return np.asarray(fn(m.interior), dtype=float) * np.ones(m.M - 1)


def l2_norm(v: np.ndarray, mass: TriDiag) -> float:
    """``sqrt(v^T Mass v)``, the L2 norm of the finite element function."""
    v = np.asarray(v, dtype=float)
    if v.shape[0] != mass.size:
        raise ValueError(f"vector of length {v.shape[0]} does not match matrix size {mass.size}")
    return float(np.sqrt(max(v @ mass.matvec(v), 0.0)))


class TridiagFactor:
    """LU factorisation of a diagonally dominant tridiagonal matrix.

    Factor once, solve many right-hand sides; the time stepper reuses one
    factor across all levels when the scheme matrix does not change.
    Backed by LAPACK ``?gttrf``/``?gttrs``.
    """

    def __init__(self, A: TriDiag):
        if A.dominance_margin() <= 0:
            raise SingularSystemError("matrix is not strictly diagonally dominant")
        self.A = A
        if A.size < 3:
            # the LAPACK wrapper mis-sizes its work arrays below n = 3
            self._lu = None
            return
        dl, d, du, du2, ipiv, info = dgttrf(A.sub, A.diag, A.sup)
        if info != 0:
            raise SingularSystemError(f"zero pivot in tridiagonal elimination (info={info})")
        self._lu = (dl, d, du, du2, ipiv)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        rhs = np.asarray(rhs, dtype=float)
        if rhs.shape[0] != self.A.size:
            raise ValueError(
                f"right-hand side of length {rhs.shape[0]} for a system of size {self.A.size}"
            )
        if self._lu is None:
            return np.linalg.solve(self.A.todense(), rhs)
        x, info = dgttrs(*self._lu, rhs)
        if info != 0:
            raise SingularSystemError(f"tridiagonal solve failed (info={info})")
        return x


def tridiag_solve(A: TriDiag, rhs: np.ndarray) -> np.ndarray:
    return TridiagFactor(A).solve(rhs)

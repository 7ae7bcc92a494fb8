"""Exact fractional calculus on sums of shifted power functions.

A :class:`PowerExpansion` is a finite sum of terms ``c * (t - s)_+ ** beta``.
Such sums are closed under Riemann-Liouville integration and (for shifts
``s >= 0``) Caputo differentiation from 0, which makes them a convenient
source of manufactured solutions and exact reference values.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, isclose
from typing import Iterable, Sequence

import numpy as np
from scipy.special import gammaln

__all__ = [
    "PowerTerm",
    "PowerExpansion",
    "eval_expansion",
    "caputo_of_power",
    "rlint_of_power",
    "rebase",
    "delayed_history_expansion",
    "manufacture_G",
]


def _gamma_ratio(num: float, den: float) -> float:
    """``Gamma(num) / Gamma(den)`` for positive arguments."""
    return float(np.exp(gammaln(num) - gammaln(den)))


@dataclass(frozen=True)
class PowerTerm:
    c: float
    s: float = 0.0
    beta: float = 0.0

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        d = t - self.s
        if self.beta == 0:
            out = np.where(d >= 0, self.c, 0.0)
        else:
            with np.errstate(divide="ignore", invalid="ignore"):
                out = np.where(d > 0, self.c * np.abs(d) ** self.beta, 0.0)
        return out if out.ndim else float(out)

    @property
    def singular(self) -> bool:
        """True when the term blows up at its shift (negative exponent)."""
        return self.beta < 0


class PowerExpansion:
    """Sum of :class:`PowerTerm` objects.

    Terms sharing a shift and an exponent are merged; zero coefficients are
    dropped, so two expansions compare equal when their merged term sets
    agree.
    """

    def __init__(self, terms: Iterable[PowerTerm | tuple] = ()):
        merged: dict[tuple[float, float], float] = {}
        for term in terms:
            if not isinstance(term, PowerTerm):
                term = PowerTerm(*term)
            key = (float(term.s), float(term.beta))
            merged[key] = merged.get(key, 0.0) + float(term.c)
        self.terms: tuple[PowerTerm, ...] = tuple(
            PowerTerm(c, s, beta) for (s, beta), c in sorted(merged.items()) if c != 0.0
        )

    @classmethod
    def constant(cls, c: float = 1.0) -> "PowerExpansion":
        return cls([PowerTerm(c, 0.0, 0.0)])

    @classmethod
    def polynomial(cls, coeffs: Sequence[float], s: float = 0.0) -> "PowerExpansion":
        """``sum_j coeffs[j] * (t - s)**j``."""
        return cls(PowerTerm(c, s, float(j)) for j, c in enumerate(coeffs))

    def __call__(self, t):
        return eval_expansion(self, t)

    def __iter__(self):
        return iter(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __add__(self, other: "PowerExpansion") -> "PowerExpansion":
        return PowerExpansion(self.terms + other.terms)

    def __sub__(self, other: "PowerExpansion") -> "PowerExpansion":
        return self + (-1.0) * other

    def __mul__(self, k: float) -> "PowerExpansion":
        return PowerExpansion(PowerTerm(k * t.c, t.s, t.beta) for t in self.terms)

    __rmul__ = __mul__

    def __neg__(self) -> "PowerExpansion":
        return (-1.0) * self

    @classmethod
    def polynomial_from(cls, coeffs: Sequence[float], origin: float) -> "PowerExpansion":
        """``sum_j coeffs[j] * t**j`` written in powers of ``(t - origin)``.

        The result agrees with the polynomial for every ``t >= origin``;
        use ``origin = -tau`` for history data on ``[-tau, 0]``.
        """
        out = []
        for j, c in enumerate(coeffs):
            for i in range(j + 1):
                out.append(PowerTerm(c * comb(j, i) * origin ** (j - i), origin, float(i)))
        return cls(out)

    def shifted(self, dt: float) -> "PowerExpansion":
        """The expansion of ``t -> self(t - dt)``."""
        return PowerExpansion(PowerTerm(t.c, t.s + dt, t.beta) for t in self.terms)

    @property
    def min_shift(self) -> float:
        return min((t.s for t in self.terms), default=0.0)

    def isclose(self, other: "PowerExpansion", rtol: float = 1e-12, atol: float = 0.0) -> bool:
        a, b = self.terms, other.terms
        if len(a) != len(b):
            return False
        return all(
            isclose(x.s, y.s, abs_tol=1e-14)
            and isclose(x.beta, y.beta, abs_tol=1e-14)
            and isclose(x.c, y.c, rel_tol=rtol, abs_tol=atol)
            for x, y in zip(a, b)
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, PowerExpansion):
            return NotImplemented
        return self.terms == other.terms

    def __repr__(self) -> str:
        if not self.terms:
            return "PowerExpansion(0)"
        parts = [f"{t.c:+.6g}*(t-{t.s:g})^{t.beta:g}" for t in self.terms]
        return "PowerExpansion(" + " ".join(parts) + ")"


def eval_expansion(e: PowerExpansion, t):
    t_arr = np.asarray(t, dtype=float)
    total = np.zeros_like(t_arr)
    for term in e.terms:
        total = total + term(t_arr)
    return total if total.ndim else float(total)


def _check_shifts(e: PowerExpansion, what: str) -> None:
    for term in e.terms:
        if term.s < 0:
            raise ValueError(
                f"{what} is taken from t = 0; term with shift {term.s} < 0 must be rebased first"
            )


def caputo_of_power(alpha: float, e: PowerExpansion) -> PowerExpansion:
    """Caputo derivative of order ``alpha`` in (0, 1), taken from 0.

    Exponents ``0 < beta < alpha`` produce singular terms; they are valid
    only strictly to the right of their shift.
    """
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    _check_shifts(e, "Caputo derivative")
    out = []
    for term in e.terms:
        if term.beta == 0:
            continue
        if term.beta < 0:
            raise ValueError("Caputo derivative needs beta >= 0")
        c = term.c * _gamma_ratio(term.beta + 1.0, term.beta + 1.0 - alpha)
        out.append(PowerTerm(c, term.s, term.beta - alpha))
    return PowerExpansion(out)


def rlint_of_power(alpha: float, e: PowerExpansion) -> PowerExpansion:
    """Riemann-Liouville integral of order ``alpha > 0`` from 0."""
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    _check_shifts(e, "Riemann-Liouville integral")
    out = []
    for term in e.terms:
        if term.beta <= -1:
            raise ValueError("integral diverges for beta <= -1")
        c = term.c * _gamma_ratio(term.beta + 1.0, term.beta + 1.0 + alpha)
        out.append(PowerTerm(c, term.s, term.beta + alpha))
    return PowerExpansion(out)


def rebase(e: PowerExpansion, origin: float = 0.0) -> PowerExpansion:
    """Rewrite terms with shift below ``origin`` as powers of ``(t - origin)``.

    Valid on ``t >= origin``.  Only integer exponents can be expanded this
    way (binomial theorem); anything else raises.
    """
    out = []
    for term in e.terms:
        if term.s >= origin:
            out.append(term)
            continue
        k = int(round(term.beta))
        if term.beta != k or k < 0:
            raise ValueError(
                f"cannot rebase non-integer power (t-{term.s})^{term.beta} to origin {origin}"
            )
        d = origin - term.s  # (t - s) = (t - origin) + d
        for j in range(k + 1):
            out.append(PowerTerm(term.c * comb(k, j) * d ** (k - j), origin, float(j)))
    return PowerExpansion(out)


def delayed_history_expansion(
    windows: Sequence[PowerExpansion], phi: PowerExpansion, tau: float
) -> PowerExpansion:
    """``T(t - tau)`` for a cumulative, window-wise built temporal profile.

    ``phi`` describes the history on ``[-tau, 0]`` and its analytic
    continuation; ``windows[i]`` holds the increment switched on at
    ``t = i*tau`` (so on ``(0, tau]`` the profile is ``phi + windows[0]``).
    Every term in ``windows[i]`` must be supported on ``(i*tau, inf)``.
    """
    for term in phi.terms:
        if term.s < -tau - 1e-14:
            raise ValueError(f"history term shift {term.s} lies before -tau")
    for i, w in enumerate(windows):
        for term in w.terms:
            if term.s < i * tau - 1e-14 * max(1.0, tau):
                raise ValueError(
                    f"window {i + 1} term {term} is not supported on ({i}*tau, inf); "
                    "the profile must be given in cumulative form"
                )
    total = phi.shifted(tau)
    for w in windows:
        total = total + w.shifted(tau)
    return total


def cumulative_profile(windows: Sequence[PowerExpansion], phi: PowerExpansion) -> PowerExpansion:
    """Global profile ``phi + sum(windows)``, valid on ``[-tau, K*tau]``."""
    total = phi
    for w in windows:
        total = total + w
    return total


def manufacture_G(
    alpha: float,
    p: float,
    a: float,
    b: float,
    tau: float,
    lam: float,
    windows: Sequence[PowerExpansion],
    phi: PowerExpansion,
) -> PowerExpansion:
    """Temporal factor of ``G`` for a separable exact solution ``X(x) T(t)``.

    ``X`` must satisfy ``-X'' = lam X`` with zero boundary values.  The
    result is ``D^alpha T + (p lam - a) T - b I^{1-alpha}[T(. - tau)]``,
    valid on ``(0, K*tau]``.
    """
    T = rebase(cumulative_profile(windows, phi), 0.0)
    delayed = rebase(delayed_history_expansion(windows, phi, tau), 0.0)
    return caputo_of_power(alpha, T) + (p * lam - a) * T - b * rlint_of_power(1.0 - alpha, delayed)


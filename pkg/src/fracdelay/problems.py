"""Benchmark problems on ``(0, 1) x (0, 3]`` with ``tau = b = 1``.

``example1_case1`` has a manufactured exact solution

    u = sin(pi x) * (1 + t + t^alpha + (t-1)_+^{alpha+1} + (t-2)_+^{alpha+2})

with history ``(1 + t) sin(pi x)``; ``example1_case2`` has source
``t^2 sin(pi x)``, history ``(1 + pi t) sin(pi x)`` and no known solution.
"""

from __future__ import annotations

import numpy as np
from scipy.special import gammaln

from .powcalc import (
    PowerExpansion,
    PowerTerm,
    cumulative_profile,
    delayed_history_expansion,
    manufacture_G,
    rebase,
)
from .solver import ProblemSpec, Separable

__all__ = [
    "sin_mode",
    "case1_windows",
    "case1_history",
    "case1_f_time",
    "example1_case1",
    "example1_case2",
    "get_case",
]

TAU = 1.0
K = 3


def sin_mode(x):
    return np.sin(np.pi * np.asarray(x, dtype=float))


SIN_EIGENVALUE = np.pi**2


def case1_history() -> PowerExpansion:
    """``1 + t`` written around ``-tau`` so it is valid on ``[-tau, 0]``."""
    return PowerExpansion.polynomial_from([1.0, 1.0], origin=-TAU)


def case1_windows(alpha: float) -> list[PowerExpansion]:
    return [
        PowerExpansion([PowerTerm(1.0, 0.0, alpha)]),
        PowerExpansion([PowerTerm(1.0, 1.0, alpha + 1.0)]),
        PowerExpansion([PowerTerm(1.0, 2.0, alpha + 2.0)]),
    ]


def case1_f_time(alpha: float, p: float = 1 / np.pi**2, a: float = -2.0, b: float = 1.0) -> PowerExpansion:
    """Temporal factor of the original source ``f`` for case 1.

    ``f = T' + (p lam - a) D_RL^{1-alpha} T - b T(t - tau)``, all exact on
    shifted powers.  It carries a ``t^(alpha-1)`` singularity at ``t = 0``.
    """
    windows, phi = case1_windows(alpha), case1_history()
    T = rebase(cumulative_profile(windows, phi), 0.0)
    delayed = rebase(delayed_history_expansion(windows, phi, TAU), 0.0)
    mu = 1.0 - alpha
    terms = []
    for term in T.terms:
        if term.beta > 0:
            terms.append(PowerTerm(term.c * term.beta, term.s, term.beta - 1.0))
        rl = np.exp(gammaln(term.beta + 1.0) - gammaln(term.beta + 1.0 - mu))
        terms.append(PowerTerm((p * SIN_EIGENVALUE - a) * term.c * rl, term.s, term.beta - mu))
    return PowerExpansion(terms) - b * delayed


def example1_case1(alpha: float, *, source: str = "G") -> ProblemSpec:
    """``source`` is ``"G"`` (closed-form G) or ``"f-sampled"``."""
    p, a, b = 1.0 / np.pi**2, -2.0, 1.0
    windows, phi = case1_windows(alpha), case1_history()
    exact = Separable(sin_mode, cumulative_profile(windows, phi))
    history = Separable(sin_mode, phi)
    common = dict(p=p, a=a, b=b, alpha=alpha, tau=TAU, K=K, phi=history, L=1.0, exact=exact)
    if source == "G":
        g = manufacture_G(alpha, p, a, b, TAU, SIN_EIGENVALUE, windows, phi)
        return ProblemSpec(G=Separable(sin_mode, g), name="example1-case1", **common)
    if source == "f-sampled":
        f = Separable(sin_mode, case1_f_time(alpha, p, a, b))
        return ProblemSpec(f=f, f_mode="sampled", name="example1-case1", **common)
    raise ValueError(f"unknown source route {source!r}")


def example1_case2(alpha: float, *, source: str = "f-exact") -> ProblemSpec:
    """``source`` is ``"f-exact"`` (G = I^{1-alpha} f in closed form) or ``"f-sampled"``."""
    history = Separable(sin_mode, PowerExpansion.polynomial_from([1.0, np.pi], origin=-TAU))
    f = Separable(sin_mode, PowerExpansion([PowerTerm(1.0, 0.0, 2.0)]))
    mode = {"f-exact": "exact", "f-sampled": "sampled"}.get(source)
    if mode is None:
        raise ValueError(f"unknown source route {source!r}")
    return ProblemSpec(
        p=0.2, a=-1.0, b=1.0, alpha=alpha, tau=TAU, K=K, phi=history, L=1.0,
        f=f, f_mode=mode, name="example1-case2",
    )


def get_case(name: str, alpha: float, **kw) -> ProblemSpec:
    if name == "example1-case1":
        return example1_case1(alpha, **kw)
    if name == "example1-case2":
        return example1_case2(alpha, **kw)
    raise ValueError(f"unknown case {name!r}")

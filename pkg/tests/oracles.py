"""Independent reference values: adaptive quadrature of the defining integrals."""

import warnings

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.special import gamma


def _pieces(t, breaks):
    cuts = sorted({0.0, *[b for b in breaks if 0.0 < b < t]})
    mid = 0.5 * (cuts[-1] + t)
    return list(zip(cuts[:-1], cuts[1:])), (cuts[-1], mid), (mid, t)


def rl_integral(g, mu, t, breaks=()):
    """``(1/Gamma(mu)) int_0^t (t-s)^(mu-1) g(s) ds``; ``g`` may be weakly singular at 0 and at ``breaks``."""
    kw = dict(epsabs=1e-13, epsrel=1e-11, limit=400)
    smooth, near, last = _pieces(t, breaks)
    total = 0.0
    with warnings.catch_warnings():
        # strong endpoint singularities trip QUADPACK's roundoff detector;
        # callers compare the result against a tolerance anyway
        warnings.simplefilter("ignore", IntegrationWarning)
        for lo, hi in smooth + [near]:
            total += quad(lambda s: (t - s) ** (mu - 1.0) * g(s), lo, hi, **kw)[0]
        # algebraic endpoint weight (t - s)^(mu - 1) on the final piece
        total += quad(g, last[0], last[1], weight="alg", wvar=(0.0, mu - 1.0), **kw)[0]
    return total / gamma(mu)


def caputo(dT, alpha, t, breaks=()):
    """Caputo derivative from the first derivative ``dT``."""
    return rl_integral(dT, 1.0 - alpha, t, breaks)


def case1_T(alpha):
    def T(t):
        t = float(t)
        out = 1.0 + t
        if t > 0:
            out += t**alpha
        if t > 1:
            out += (t - 1) ** (alpha + 1)
        if t > 2:
            out += (t - 2) ** (alpha + 2)
        return out

    def dT(t):
        t = float(t)
        out = 1.0
        if t > 0:
            out += alpha * t ** (alpha - 1)
        if t > 1:
            out += (alpha + 1) * (t - 1) ** alpha
        if t > 2:
            out += (alpha + 2) * (t - 2) ** (alpha + 1)
        return out

    return T, dT


def case1_G_quadrature(alpha, t, p=1 / np.pi**2, a=-2.0, b=1.0, tau=1.0):
    """``D^alpha T + (p pi^2 - a) T - b I^{1-alpha}[T(. - tau)]`` by quadrature."""
    T, dT = case1_T(alpha)
    breaks = (1.0, 2.0)
    d = caputo(dT, alpha, t, breaks)
    delayed = rl_integral(lambda s: T(s - tau), 1.0 - alpha, t, breaks)
    return d + (p * np.pi**2 - a) * T(t) - b * delayed

"""Kernel identity suite and truncation-order probes, gathered into one report."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..fracops import (
    l1_apply,
    omega,
    p_sequence_graded,
    p_sequence_uniform,
    truncation_probe_fracint,
    truncation_probe_l1,
    uniform_weights,
    weight_row,
)
from ..mesh import build_temporal
from ..powcalc import PowerExpansion, PowerTerm

__all__ = ["CheckResult", "KernelConfig", "verify_kernels", "format_report"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    threshold: float
    passed: bool
    detail: str = ""


@dataclass
class KernelConfig:
    n_max: int = 200
    alphas: Sequence[float] = (0.3, 0.5, 0.7)
    rs: Sequence[float] = (1.0, 2.0, 3.0)
    identity_tol: float = 1e-10
    telescope_tol: float = 1e-12
    bound_slack: float = 1e-10
    probe_Ns: Sequence[int] = (32, 64, 128, 256)
    probe_tol: float = 0.1


def _check(name, value, threshold, ok=None, detail="") -> CheckResult:
    passed = bool(value <= threshold) if ok is None else bool(ok)
    return CheckResult(name, float(value), float(threshold), passed, detail)


def telescoping_deviation(alpha: float, r: float, n_max: int) -> float:
    """Largest relative ``|sum_k rho_k a^{(n)}_{n-k} - omega_{2-alpha}(t_n)|`` over ``n <= n_max``."""
    # pick N so the mesh has at least n_max positive levels
    N = max(2, -(-n_max // 2))
    mesh = build_temporal(1.0, 1, N, r)
    worst = 0.0
    for n in range(1, min(n_max, mesh.n_steps) + 1):
        w = weight_row(mesh, alpha, n)
        target = omega(2.0 - alpha, mesh.t(n))
        worst = max(worst, abs(w.quad.sum() - target) / target)
    return worst


def p_identity_deviation(alpha: float, n_max: int) -> float:
    """``max |sum_{j=k}^n P_{n-j} a_{j-k} - 1|`` over ``1 <= k <= n <= n_max``.

    With ``m = n - k`` the sum is the convolution ``(P * a)[m]``.
    """
    a = uniform_weights(alpha, 1.0 / n_max, n_max)
    P = p_sequence_uniform(a, alpha).values
    conv = np.convolve(P, a)[:n_max]
    return float(np.abs(conv - 1.0).max())


def p_bound_excess(alpha: float, n_max: int, rho: Optional[float] = None) -> float:
    """``max_n (sum_{j=1}^n P_{n-j} - omega_{1+alpha}(t_n))``; nonpositive when the bound holds."""
    rho = 1.0 / n_max if rho is None else rho
    a = uniform_weights(alpha, rho, n_max)
    P = p_sequence_uniform(a, alpha).values
    n = np.arange(1, n_max + 1)
    return float((np.cumsum(P) - omega(1.0 + alpha, n * rho)).max())


def graded_bound_excess(alpha: float, r: float, N: int = 20, K: int = 5) -> float:
    """``max (sum_{j > 2(k-1)N} Pbar^{(n)}_{n-j} omega_{1-alpha}(t_j - (k-1) tau) - 1)``.

    Taken over every level ``n`` of a ``K``-window mesh and every window
    ``k`` that has started by level ``n``.
    """
    mesh = build_temporal(1.0, K, N, r)
    rows = [weight_row(mesh, alpha, n) for n in range(1, mesh.n_steps + 1)]
    t = mesh.positive_times
    worst = -np.inf
    for n in range(1, mesh.n_steps + 1):
        by_j = p_sequence_graded(rows[:n]).by_level()  # by_j[j-1] = Pbar_{n-j}
        for k in range(1, mesh.window_of(n) + 1):
            lo = 2 * (k - 1) * N + 1
            j = np.arange(lo, n + 1)
            total = by_j[j - 1] @ omega(1.0 - alpha, t[j] - (k - 1) * mesh.tau)
            worst = max(worst, total - 1.0)
    return float(worst)


def l1_affine_deviation(alpha: float, r: float, N: int = 16) -> float:
    """L1 applied to ``2 + 3t`` against the exact ``3 omega_{2-alpha}(t)`` (relative)."""
    mesh = build_temporal(1.0, 3, N, r)
    t = mesh.positive_times
    u = 2.0 + 3.0 * t
    worst = 0.0
    for n in range(1, mesh.n_steps + 1):
        exact = 3.0 * omega(2.0 - alpha, t[n])
        worst = max(worst, abs(l1_apply(weight_row(mesh, alpha, n), u[: n + 1]) - exact) / exact)
    return worst


def verify_kernels(cfg: Optional[KernelConfig] = None) -> list[CheckResult]:
    """Run the identity suite and the truncation probes; failures are entries, never exceptions."""
    cfg = cfg or KernelConfig()
    out: list[CheckResult] = []
    for r in cfg.rs:
        for alpha in cfg.alphas:
            dev = telescoping_deviation(alpha, r, cfg.n_max)
            out.append(_check(f"telescoping alpha={alpha} r={r}", dev, cfg.telescope_tol))
    for alpha in cfg.alphas:
        out.append(_check(f"P identity alpha={alpha}", p_identity_deviation(alpha, cfg.n_max), cfg.identity_tol))
        out.append(_check(f"P bound alpha={alpha}", p_bound_excess(alpha, cfg.n_max), cfg.bound_slack))
    for r in cfg.rs:
        for alpha in cfg.alphas:
            out.append(_check(f"Pbar bound alpha={alpha} r={r}", graded_bound_excess(alpha, r), cfg.bound_slack))
    for alpha in cfg.alphas:
        out.append(_check(f"L1 affine exactness alpha={alpha}", l1_affine_deviation(alpha, 2.0), 1e-12))

    for alpha in cfg.alphas:
        q = min(2.0 - alpha, 1.0 + alpha)
        res = truncation_probe_l1(alpha, 1.0, cfg.probe_Ns, PowerExpansion([PowerTerm(1.0, 0.0, alpha)]))
        out.append(
            _check(
                f"L1 probe order alpha={alpha}",
                abs(res.last_rate - q),
                cfg.probe_tol,
                detail=f"rate {res.last_rate:.4f}, expected {q:.4f}",
            )
        )
        history = PowerExpansion.polynomial([1.0, 1.0])
        res = truncation_probe_fracint(alpha, 1.0, cfg.probe_Ns, history)
        out.append(
            _check(
                f"fracint probe order alpha={alpha}",
                abs(res.last_rate - 1.0),
                cfg.probe_tol,
                detail=f"rate {res.last_rate:.4f}, expected 1.0",
            )
        )
    return out


def format_report(results: Sequence[CheckResult]) -> str:
    lines = []
    for c in results:
        tag = "PASS" if c.passed else "FAIL"
        extra = f"  ({c.detail})" if c.detail else ""
        lines.append(f"{tag}  {c.name}: {c.value:.3e} <= {c.threshold:.1e}{extra}")
    n_fail = sum(not c.passed for c in results)
    lines.append(f"{len(results) - n_fail}/{len(results)} checks passed")
    return "\n".join(lines)

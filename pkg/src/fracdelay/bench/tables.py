"""Error and convergence-rate tables.

``E(M, N, k, l)`` is the largest L2 error over levels ``2kN+1 .. 2lN``
(windows ``k+1`` through ``l``).  A row with ``k == l`` denotes the single
level ``2lN``; the spatial tables at ``t = t_{2KN}`` use that form.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from ..fem1d import assemble_mass, interpolate, l2_norm
from ..mesh import build_spatial, build_temporal
from ..problems import get_case
from ..solver import ProblemSpec, Separable, SolveRecord, solve

__all__ = [
    "ErrorRow",
    "ErrorTable",
    "RunConfig",
    "error_max",
    "rate",
    "run_reference",
    "run_temporal_table",
    "run_spatial_table",
    "round_sig",
]

log = logging.getLogger(__name__)

CASES = ("example1-case1", "example1-case2")


def round_sig(x: float, digits: int = 5) -> float:
    """Round to ``digits`` significant digits (the precision written to CSV)."""
    return float(f"{x:.{digits - 1}e}")


def rate(E_coarse: float, E_fine: float) -> float:
    """``log2(E_coarse / E_fine)``."""
    if not (E_coarse > 0 and E_fine > 0):
        raise ValueError(f"rates need positive errors, got {E_coarse} and {E_fine}")
    return math.log2(E_coarse / E_fine)


# ---------------------------------------------------------------------------
# tables


@dataclass(frozen=True)
class ErrorRow:
    case: str
    alpha: float
    r: float
    M: int
    N: int
    k: int
    l: int
    E: float
    rate: Optional[float] = None

    def sort_key(self):
        return (self.alpha, self.r, self.N, self.M, self.k, self.l)


@dataclass
class ErrorTable:
    rows: list[ErrorRow] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def sorted(self) -> "ErrorTable":
        return ErrorTable(sorted(self.rows, key=ErrorRow.sort_key), dict(self.metadata))

    def select(self, **kw) -> list[ErrorRow]:
        return [row for row in self.rows if all(getattr(row, k) == v for k, v in kw.items())]

    def __len__(self) -> int:
        return len(self.rows)


def _with_rates(rows: list[ErrorRow], ladder: str) -> list[ErrorRow]:
    """Attach rates between rows that differ only by a doubling of ``ladder`` (``"N"`` or ``"M"``)."""
    index = {(r.alpha, r.r, r.M, r.N, r.k, r.l): r for r in rows}
    out = []
    for row in rows:
        if ladder == "N":
            prev = index.get((row.alpha, row.r, row.M, row.N // 2, row.k, row.l)) if row.N % 2 == 0 else None
        else:
            prev = index.get((row.alpha, row.r, row.M // 2, row.N, row.k, row.l)) if row.M % 2 == 0 else None
        value = None
        if prev is not None and prev.E > 0 and row.E > 0:
            value = round(rate(prev.E, row.E), 4)
        out.append(ErrorRow(**{**asdict(row), "rate": value}))
    return out


@dataclass
class RunConfig:
    """Settings for one table run; mirrors the JSON config accepted by the CLI.

    ``reference`` is ``"auto"`` (exact solution when the case has one,
    otherwise a nested reference), ``"exact"`` or ``"nested"``.  Nested
    temporal references use ``N_ref = reference_factor * max(Ns)`` with the
    same ``r`` and ``M``; nested spatial references use
    ``M_ref = reference_factor * max(Ms)`` with the same temporal mesh.
    """

    case: str = "example1-case1"
    alphas: list[float] = field(default_factory=lambda: [0.5])
    rs: list[float] = field(default_factory=lambda: [1.0])
    Ns: list[int] = field(default_factory=lambda: [200, 400, 800, 1600])
    Ms: list[int] = field(default_factory=lambda: [512])
    windows: list[list[int]] = field(default_factory=lambda: [[0, 1], [1, 3]])
    reference: str = "auto"
    reference_factor: int = 8
    source: Optional[str] = None
    r_from_alpha: bool = False
    out: str = "out"
    workers: int = 1

    def __post_init__(self):
        if self.case not in CASES:
            raise ValueError(f"unknown case {self.case!r}; expected one of {CASES}")
        if self.reference not in ("auto", "exact", "nested"):
            raise ValueError(f"unknown reference policy {self.reference!r}")
        if self.reference_factor < 2 or self.reference_factor & (self.reference_factor - 1):
            raise ValueError("reference_factor must be a power of two >= 2")
        for name in ("Ns", "Ms"):
            ladder = sorted(getattr(self, name))
            if not ladder:
                raise ValueError(f"{name} must not be empty")
            for lo, hi in zip(ladder[:-1], ladder[1:]):
                if hi != 2 * lo:
                    raise ValueError(f"{name} ladder must be strictly doubling, got {ladder}")
        K = 3
        for pair in self.windows:
            if len(pair) != 2 or not 0 <= pair[0] <= pair[1] <= K:
                raise ValueError(f"bad window pair {pair}; need 0 <= k <= l <= {K}")
        if not self.alphas or not all(0 < a < 1 for a in self.alphas):
            raise ValueError("alphas must lie in (0, 1)")
        if not self.r_from_alpha and not all(r >= 1 for r in self.rs):
            raise ValueError("grading exponents must be >= 1")

    def digest(self) -> str:
        """Stable hash of every setting that affects the numbers."""
        data = asdict(self)
        data.pop("out")
        data.pop("workers")
        return hashlib.sha256(json.dumps(data, sort_keys=True).encode()).hexdigest()[:16]

    def grading(self, alpha: float) -> list[float]:
        return [1.0 / alpha] if self.r_from_alpha else list(self.rs)

    def spec(self, alpha: float) -> ProblemSpec:
        kw = {"source": self.source} if self.source else {}
        return get_case(self.case, alpha, **kw)


Truth = Union[Separable, SolveRecord]


def _prolong(values: np.ndarray, coarse_M: int, fine_M: int) -> np.ndarray:
    """Interior nodal values of a coarse P1 function on a nested finer mesh."""
    m = fine_M // coarse_M
    full = np.concatenate([[0.0], values, [0.0]])
    x_c = np.arange(coarse_M + 1) * m
    return np.interp(np.arange(1, fine_M), x_c, full)


def _level_errors(record: SolveRecord, truth: Truth, levels: Sequence[int]) -> np.ndarray:
    tm, sm = record.tmesh, record.smesh
    if isinstance(truth, SolveRecord):
        stride = truth.tmesh.is_refinement_of(tm)
        if not stride:
            raise ValueError(
                "reference temporal mesh is not a nested refinement of the coarse mesh "
                "(need the same tau, K, r and a power-of-two ratio of N)"
            )
        Mr = truth.smesh.M
        if Mr % sm.M or truth.smesh.L != sm.L:
            raise ValueError("reference spatial mesh must equal or nest the coarse mesh")
        mass = assemble_mass(truth.smesh)
        out = []
        for n in levels:
            u = record.level(n)
            if Mr != sm.M:
                u = _prolong(u, sm.M, Mr)
            out.append(l2_norm(u - truth.level(stride * n), mass))
        return np.array(out)
    mass = assemble_mass(sm)
    out = []
    for n in levels:
        t = float(tm.t(n))
        exact = interpolate(lambda x: truth(x, t), sm)
        out.append(l2_norm(record.level(n) - exact, mass))
    return np.array(out)


def window_levels(N: int, k: int, l: int) -> range:
    if k == l:
        return range(2 * l * N, 2 * l * N + 1)
    return range(2 * k * N + 1, 2 * l * N + 1)


def error_max(record: SolveRecord, truth: Truth, k: int, l: int) -> float:
    """``max`` of the L2 error over levels ``2kN+1 .. 2lN`` (or level ``2lN`` if ``k == l``).

    ``truth`` is either an exact separable solution, compared with its nodal
    interpolant, or a reference record on a nested finer mesh.
    """
    if not 0 <= k <= l <= record.tmesh.K:
        raise ValueError(f"bad window pair ({k}, {l})")
    return float(_level_errors(record, truth, window_levels(record.tmesh.N, k, l)).max())


def run_reference(spec: ProblemSpec, r: float, N_ref: int, M: int, *, ladder_max: Optional[int] = None) -> SolveRecord:
    """Fine solve used as ground truth when no exact solution is known.

    With ``ladder_max`` given, ``N_ref`` must be ``2^m * ladder_max`` with
    ``m >= 2`` so every coarse level lands on a reference level.
    """
    if ladder_max is not None:
        ratio = N_ref // ladder_max
        if N_ref % ladder_max or ratio < 4 or ratio & (ratio - 1):
            raise ValueError(
                f"N_ref={N_ref} must be a power-of-two multiple (>= 4) of the ladder maximum {ladder_max}"
            )
    tm = build_temporal(spec.tau, spec.K, N_ref, r)
    return solve(spec, tm, build_spatial(spec.L, M))


def _truth_kind(cfg: RunConfig, spec: ProblemSpec) -> str:
    if cfg.reference == "auto":
        return "exact" if spec.exact is not None else "nested"
    if cfg.reference == "exact" and spec.exact is None:
        raise ValueError(f"case {cfg.case} has no exact solution; use a nested reference")
    return cfg.reference


def _temporal_cell(args) -> list[ErrorRow]:
    cfg, alpha, r, M, N, truth = args
    spec = cfg.spec(alpha)
    rec = solve(spec, build_temporal(spec.tau, spec.K, N, r), build_spatial(spec.L, M))
    if truth is None:
        truth = spec.exact
    rows = []
    for k, l in cfg.windows:
        E = error_max(rec, truth, k, l)
        rows.append(ErrorRow(cfg.case, alpha, r, M, N, k, l, round_sig(E)))
    return rows


def _map(fn, jobs, workers: int):
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, jobs))
    return [fn(job) for job in jobs]


def _table_metadata(cfg: RunConfig, kind: str) -> dict:
    return {
        "case": cfg.case,
        "kind": kind,
        "config_hash": cfg.digest(),
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }


def run_temporal_table(cfg: RunConfig) -> ErrorTable:
    """One row per (alpha, r, M, N, window); rates over the N ladder."""
    rows: list[ErrorRow] = []
    Ns = sorted(cfg.Ns)
    for alpha in cfg.alphas:
        spec = cfg.spec(alpha)
        kind = _truth_kind(cfg, spec)
        for r in cfg.grading(alpha):
            jobs = []
            for M in sorted(cfg.Ms):
                truth = None
                if kind == "nested":
                    N_ref = cfg.reference_factor * Ns[-1]
                    log.info("reference run alpha=%g r=%g N_ref=%d M=%d", alpha, r, N_ref, M)
                    truth = run_reference(spec, r, N_ref, M, ladder_max=Ns[-1])
                jobs.extend((cfg, alpha, r, M, N, truth) for N in Ns)
            for cell in _map(_temporal_cell, jobs, cfg.workers):
                rows.extend(cell)
    table = ErrorTable(_with_rates(rows, "N"), _table_metadata(cfg, "time"))
    return table.sorted()


def _spatial_cell(args) -> list[ErrorRow]:
    cfg, alpha, r, M, N, truth = args
    spec = cfg.spec(alpha)
    rec = solve(spec, build_temporal(spec.tau, spec.K, N, r), build_spatial(spec.L, M))
    if truth is None:
        truth = spec.exact
    return [
        ErrorRow(cfg.case, alpha, r, M, N, k, l, round_sig(error_max(rec, truth, k, l)))
        for k, l in cfg.windows
    ]


def run_spatial_table(cfg: RunConfig) -> ErrorTable:
    """One row per (alpha, r, N, M, window); rates over the M ladder.

    Use the window ``[K, K]`` for the error at the final level ``t_{2KN}``.
    """
    rows: list[ErrorRow] = []
    Ms = sorted(cfg.Ms)
    for alpha in cfg.alphas:
        spec = cfg.spec(alpha)
        kind = _truth_kind(cfg, spec)
        for r in cfg.grading(alpha):
            for N in sorted(cfg.Ns):
                truth = None
                if kind == "nested":
                    M_ref = cfg.reference_factor * Ms[-1]
                    log.info("spatial reference alpha=%g r=%g N=%d M_ref=%d", alpha, r, N, M_ref)
                    truth = solve(spec, build_temporal(spec.tau, spec.K, N, r), build_spatial(spec.L, M_ref))
                jobs = [(cfg, alpha, r, M, N, truth) for M in Ms]
                for cell in _map(_spatial_cell, jobs, cfg.workers):
                    rows.extend(cell)
    table = ErrorTable(_with_rates(rows, "M"), _table_metadata(cfg, "space"))
    return table.sorted()

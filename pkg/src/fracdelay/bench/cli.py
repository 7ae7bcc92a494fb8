"""Command line entry point: ``solve``, ``table-time``, ``table-space``, ``verify``.

Exit codes: 0 success, 1 validation error, 2 numerical failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional

from ..fem1d import SingularSystemError
from ..mesh import build_spatial, build_temporal
from ..problems import get_case
from ..solver import SolverDivergence, solve
from .io import emit_csv, emit_solution_slices, load_config
from .kernels import KernelConfig, format_report, verify_kernels
from .tables import RunConfig, run_spatial_table, run_temporal_table

log = logging.getLogger("fracdelay")

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3

FINE_M = 1000


@dataclass
class SolveConfig:
    """One solve.  ``times`` defaults to every level in ``[0, K tau]``; ``xs`` to every node."""

    case: str = "example1-case2"
    alpha: float = 0.3
    r: float = 1.0
    N: int = 10
    M: int = 40
    source: Optional[str] = None
    times: Optional[list[float]] = None
    xs: Optional[list[float]] = None
    cross_section: float = 0.5


def _read_json(path) -> dict:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ValueError(f"{path}: config must be a JSON object")
    return data


def _solve_config(path) -> SolveConfig:
    data = _read_json(path) if path else {}
    known = {f.name for f in fields(SolveConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(unknown)}")
    return SolveConfig(**data)


def _out_dir(args) -> Path:
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    return out


def cmd_solve(args) -> int:
    cfg = _solve_config(args.config)
    kw = {"source": cfg.source} if cfg.source else {}
    spec = get_case(cfg.case, cfg.alpha, **kw)
    tm = build_temporal(spec.tau, spec.K, cfg.N, cfg.r)
    sm = build_spatial(spec.L, cfg.M)
    rec = solve(spec, tm, sm)
    out = _out_dir(args)
    times = cfg.times if cfg.times is not None else list(tm.positive_times)
    xs = cfg.xs if cfg.xs is not None else list(sm.nodes)
    emit_solution_slices(rec, times, xs, out / "surface.csv")
    emit_solution_slices(rec, list(tm.positive_times), [cfg.cross_section], out / "cross_section.csv")
    print(f"wrote {out / 'surface.csv'} and {out / 'cross_section.csv'}")
    return EXIT_OK


def _table_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    if getattr(args, "fine_m", False):
        cfg.Ms = [FINE_M]
    if getattr(args, "full", False):
        cfg.Ns = sorted(cfg.Ns) + [2 * max(cfg.Ns)]
        log.warning("--full: ladder extended to N=%d; history cost grows like N^2", max(cfg.Ns))
    if args.workers is not None:
        cfg.workers = args.workers
    return cfg


def _write_table(table, cfg: RunConfig, args, name: str) -> None:
    out = _out_dir(args)
    emit_csv(table, out / f"{name}.csv")
    try:
        (out / f"{name}.meta.json").write_text(json.dumps(table.metadata, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write metadata to {out}: {exc}") from exc
    print((out / f"{name}.csv").read_text(), end="")


def cmd_table_time(args) -> int:
    cfg = _table_config(args)
    _write_table(run_temporal_table(cfg), cfg, args, "table_time")
    return EXIT_OK


def cmd_table_space(args) -> int:
    cfg = _table_config(args)
    _write_table(run_spatial_table(cfg), cfg, args, "table_space")
    return EXIT_OK


def cmd_verify(args) -> int:
    data = _read_json(args.config) if args.config else {}
    known = {f.name for f in fields(KernelConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(unknown)}")
    results = verify_kernels(KernelConfig(**data))
    report = format_report(results)
    out = _out_dir(args)
    lines = ["check,value,threshold,passed"]
    lines += [f"{c.name},{c.value:.6e},{c.threshold:.1e},{int(c.passed)}" for c in results]
    try:
        (out / "kernels.txt").write_text(report + "\n")
        (out / "kernels.csv").write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write kernel report to {out}: {exc}") from exc
    print(report)
    return EXIT_OK if all(c.passed for c in results) else EXIT_NUMERICAL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracdelay", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--out", default="out", help="output directory")

    p = sub.add_parser("solve", help="one run; writes solution slices")
    common(p)
    p.set_defaults(func=cmd_solve)
    for name, func in (("table-time", cmd_table_time), ("table-space", cmd_table_space)):
        p = sub.add_parser(name, help=f"{name.split('-')[1]}-convergence table")
        common(p)
        p.add_argument("--full", action="store_true", help="extend the N ladder by one doubling")
        p.add_argument("--fine-m", action="store_true", help=f"use M={FINE_M} for every cell")
        p.add_argument("--workers", type=int, default=None)
        p.set_defaults(func=func)
    p = sub.add_parser("verify", help="kernel identity suite and truncation probes")
    common(p)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (SolverDivergence, SingularSystemError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, TypeError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())

"""CSV and JSON plumbing for the bench harness."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import fields
from pathlib import Path
from typing import Sequence

import numpy as np

from ..solver import SolveRecord
from .tables import ErrorRow, ErrorTable, RunConfig

__all__ = ["HEADER", "emit_csv", "parse_csv", "emit_solution_slices", "load_config", "config_from_dict"]

HEADER = ("case", "alpha", "r", "M", "N", "k", "l", "E", "rate")


def _fmt_row(row: ErrorRow) -> list[str]:
    return [
        row.case,
        repr(float(row.alpha)),
        repr(float(row.r)),
        str(row.M),
        str(row.N),
        str(row.k),
        str(row.l),
        f"{row.E:.4e}",
        "" if row.rate is None else f"{row.rate:.4f}",
    ]


def table_to_csv(table: ErrorTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HEADER)
    for row in sorted(table.rows, key=ErrorRow.sort_key):
        writer.writerow(_fmt_row(row))
    return buf.getvalue()


def emit_csv(table: ErrorTable, path) -> None:
    """Write ``table`` in deterministic (alpha, r, N, M, k, l) order."""
    path = Path(path)
    try:
        path.write_text(table_to_csv(table))
    except OSError as exc:
        raise OSError(f"cannot write error table to {path}: {exc}") from exc


def parse_csv(path) -> ErrorTable:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise OSError(f"cannot read error table {path}: {exc}") from exc
    reader = csv.reader(io.StringIO(text))
    header = tuple(next(reader, ()))
    if header != HEADER:
        raise ValueError(f"{path}: unexpected header {header}")
    rows = []
    for rec in reader:
        case, alpha, r, M, N, k, l, E, rate = rec
        rows.append(
            ErrorRow(case, float(alpha), float(r), int(M), int(N), int(k), int(l), float(E),
                     None if rate == "" else float(rate))
        )
    return ErrorTable(rows)


def emit_solution_slices(record: SolveRecord, times: Sequence[float], xs: Sequence[float], path) -> None:
    """Write ``t,x,u`` rows; times snap to the nearest level, ``u`` is linear in ``x``."""
    tm, sm = record.tmesh, record.smesh
    xs = np.asarray(xs, dtype=float)
    if np.any(xs < 0) or np.any(xs > sm.L):
        raise ValueError(f"x values must lie in [0, {sm.L}]")
    levels = np.arange(-tm.offset, tm.n_steps + 1)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("t", "x", "u"))
    for t in times:
        n = int(levels[np.argmin(np.abs(tm.points - t))])
        u = np.interp(xs, sm.nodes, record.nodal(n))
        tn = float(tm.t(n))
        for x, v in zip(xs, u):
            writer.writerow((repr(tn), repr(float(x)), f"{v:.10e}"))
    try:
        Path(path).write_text(buf.getvalue())
    except OSError as exc:
        raise OSError(f"cannot write solution slices to {path}: {exc}") from exc


def config_from_dict(data: dict) -> RunConfig:
    known = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(unknown)}")
    return RunConfig(**data)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ValueError(f"{path}: config must be a JSON object")
    return config_from_dict(data)

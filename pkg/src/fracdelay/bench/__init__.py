"""Experiment harness: error tables, reference runs, kernel checks, CSV output."""

from .io import emit_csv, emit_solution_slices, load_config, parse_csv
from .kernels import CheckResult, verify_kernels
from .tables import (
    ErrorRow,
    ErrorTable,
    RunConfig,
    error_max,
    rate,
    run_reference,
    run_spatial_table,
    run_temporal_table,
)

__all__ = [
    "CheckResult",
    "ErrorRow",
    "ErrorTable",
    "RunConfig",
    "emit_csv",
    "emit_solution_slices",
    "error_max",
    "load_config",
    "parse_csv",
    "rate",
    "run_reference",
    "run_spatial_table",
    "run_temporal_table",
    "verify_kernels",
]

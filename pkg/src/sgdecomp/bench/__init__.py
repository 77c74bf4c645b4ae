"""Experiment harness: synthetic spectra, the matrix-free DFT sandwich and
method comparison tables."""

from .experiment import (
    CONFIG_SCHEMA,
    METHODS,
    ExperimentRecord,
    load_config,
    nnz_scaling,
    run_cell,
    run_experiment,
)
from .matrices import SpectrumSpec, dft_sandwich_operator, synth_matrix
from .report import emit_report, read_records_csv

__all__ = [
    "CONFIG_SCHEMA",
    "METHODS",
    "ExperimentRecord",
    "SpectrumSpec",
    "dft_sandwich_operator",
    "emit_report",
    "load_config",
    "nnz_scaling",
    "read_records_csv",
    "run_cell",
    "run_experiment",
    "synth_matrix",
]

"""Experiment harness: Monte Carlo sweeps, DCSK baseline, CSV results and CLI."""

from .dcsk import DcskConfig, dcsk_baseline, dcsk_demodulate, dcsk_modulate
from .results import CSV_FIELDS, ResultRow, emit_results, read_results, ser_ci, wilson_interval
from .sweeps import (
    BATCH_FRAMES,
    CheckpointMissingError,
    ExperimentSpec,
    default_model_path,
    resolve_detector,
    run_misalignment_sweep,
    run_ser_sweep,
    simulate_point,
    worker_count,
)

__all__ = [
    "BATCH_FRAMES",
    "CSV_FIELDS",
    "CheckpointMissingError",
    "DcskConfig",
    "ExperimentSpec",
    "ResultRow",
    "dcsk_baseline",
    "dcsk_demodulate",
    "dcsk_modulate",
    "default_model_path",
    "emit_results",
    "read_results",
    "resolve_detector",
    "run_misalignment_sweep",
    "run_ser_sweep",
    "ser_ci",
    "simulate_point",
    "wilson_interval",
    "worker_count",
]

"""Experiment harness: config parsing, training loops, metrics, CLI."""

from .config import ExperimentConfig, apply_overrides, parse_config
from .diagnostics import taylor_diagnostics
from .metrics import emit_metrics
from .runner import CountingProblem, RunRecord, run_experiment

__all__ = [
    "ExperimentConfig",
    "apply_overrides",
    "parse_config",
    "taylor_diagnostics",
    "emit_metrics",
    "CountingProblem",
    "RunRecord",
    "run_experiment",
]

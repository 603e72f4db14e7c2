"""Configuration-driven experiment runner, analysis and CLI."""
from .analysis import aggregate, emit_plot, fit_loglog_slope
from .config import ExperimentConfig, geometric_grid
from .runner import TrialRecord, read_records, run_experiment, run_trial

__all__ = [
    "ExperimentConfig", "TrialRecord", "aggregate", "emit_plot", "fit_loglog_slope",
    "geometric_grid", "read_records", "run_experiment", "run_trial",
]

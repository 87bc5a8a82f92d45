"""Experiment driver: configuration, Monte Carlo sweeps, demo bundle and CLI."""

from .config import ExperimentConfig, load_config, parse_config
from .sweep import PdRow, SweepResult, SweepSpec, TrialRecord, run_sweep, run_trial

__all__ = [
    "ExperimentConfig",
    "PdRow",
    "SweepResult",
    "SweepSpec",
    "TrialRecord",
    "load_config",
    "parse_config",
    "run_sweep",
    "run_trial",
]

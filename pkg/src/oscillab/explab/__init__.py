"""Experiment harness: configs, runners, and report emission."""
from .config import DEFAULTS, EXPERIMENTS, ExperimentConfig, default_config, load_config
from .experiments import RUNNERS, run
from .report import ReportRow, emit, emit_plotscript, from_json, to_csv, to_json

__all__ = ["DEFAULTS", "EXPERIMENTS", "ExperimentConfig", "default_config", "load_config",
           "RUNNERS", "run", "ReportRow", "emit", "emit_plotscript", "from_json", "to_csv",
           "to_json"]

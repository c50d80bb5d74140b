# Lernschleife, Diagnosen, Konfiguration, Ergebnisdateien und Kommandozeile
import logging

logger = logging.getLogger(__name__)

from .cli import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, build_parser, main
from .config import (EnvironmentSettings, EstimatorSettings, ExperimentConfig, GpSettings, GradvarSettings,
                     LandscapeSettings, OptimizerSettings, PolicySettings, RolloutSettings, TrialSettings,
                     load_config)
from .diagnostics import GRADVAR_COLUMNS, landscape_columns, landscape_scan, random_direction, variance_scan
from .learner import Learner, LearningAborted, learn, policy_controller
from .results import EvaluationSummary, RunResult, TrialSummary, read_trials_csv, write_csv, write_run_result

__all__ = [
    "EXIT_CONFIG", "EXIT_NUMERIC", "EXIT_OK", "build_parser", "main",
    "EnvironmentSettings", "EstimatorSettings", "ExperimentConfig", "GpSettings", "GradvarSettings",
    "LandscapeSettings", "OptimizerSettings", "PolicySettings", "RolloutSettings", "TrialSettings", "load_config",
    "GRADVAR_COLUMNS", "landscape_columns", "landscape_scan", "random_direction", "variance_scan",
    "Learner", "LearningAborted", "learn", "policy_controller",
    "EvaluationSummary", "RunResult", "TrialSummary", "read_trials_csv", "write_csv", "write_run_result",
]

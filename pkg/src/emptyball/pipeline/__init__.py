"""Estimators, experiment orchestration, statistics and the command line."""
from .config import ExperimentConfig, config_from_dict, load_config
from .estimators import TailEstimate, estimate_direct, estimate_factorized, estimate_hit_integral
from .experiment import CSV_COLUMNS, ExperimentReport, run_experiment, write_report
from .stats import binomial_sigma, wilson_ci

__all__ = [
    "ExperimentConfig", "config_from_dict", "load_config", "TailEstimate", "estimate_direct",
    "estimate_factorized", "estimate_hit_integral", "CSV_COLUMNS", "ExperimentReport",
    "run_experiment", "write_report", "binomial_sigma", "wilson_ci",
]

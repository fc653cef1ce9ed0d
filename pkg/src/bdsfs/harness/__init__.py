"""Verification harness: Monte Carlo experiments, statistical tests and quadrature."""

from .experiments import (
    clt_report,
    clt_samples,
    run_clt,
    run_contour_compare,
    run_lln,
    run_oracle_compare,
    run_replicates,
)
from .quadrature import verify_calculus_identity, verify_moments
from .report import (
    ExperimentConfig,
    TestReport,
    clt_condition,
    clt_horizon,
    lln_condition,
    reports_to_csv,
    reports_to_json,
)
from .stats import ks_distance, ks_one_sample, mc_mean, mc_variance, two_sample_chi2

__all__ = [
    "ExperimentConfig",
    "TestReport",
    "clt_condition",
    "clt_horizon",
    "clt_report",
    "clt_samples",
    "ks_distance",
    "ks_one_sample",
    "lln_condition",
    "mc_mean",
    "mc_variance",
    "reports_to_csv",
    "reports_to_json",
    "run_clt",
    "run_contour_compare",
    "run_lln",
    "run_oracle_compare",
    "run_replicates",
    "two_sample_chi2",
    "verify_calculus_identity",
    "verify_moments",
]

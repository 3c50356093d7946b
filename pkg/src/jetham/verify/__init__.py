"""Covariance and consistency harness."""

from .changes import default_changes, probe_points
from .checks import (
    ADFDReport,
    CovarianceReport,
    ad_fd_crosscheck,
    check_connection_coeff_rules,
    check_dtensor_covariance,
    check_nlc_covariance,
)
from .suites import (
    SUITES,
    ChartPair,
    CheckResult,
    covariance_suite,
    integrability_suite,
    oracle_suite,
    run_suite,
    scenario_probes,
)

__all__ = [
    "ADFDReport",
    "ChartPair",
    "CheckResult",
    "CovarianceReport",
    "SUITES",
    "ad_fd_crosscheck",
    "check_connection_coeff_rules",
    "check_dtensor_covariance",
    "check_nlc_covariance",
    "covariance_suite",
    "default_changes",
    "integrability_suite",
    "oracle_suite",
    "probe_points",
    "run_suite",
    "scenario_probes",
]

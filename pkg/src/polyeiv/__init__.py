"""Goodness-of-fit testing for polynomial regression with noisy covariates.

The covariate ``X`` is observed only as ``W = X + U`` with noise of known
(or separately estimated) law.  The package fits the polynomial by moment
correction, measures lack of fit with a weighted characteristic-function
distance and calibrates it with a model-based bootstrap.
"""

from .bootstrap import TestConfig, TestReport, critical_point, reject_at, run_test
from .deconvolution import SmoothedCdf, estimate_cdf, kappa_alpha, select_bandwidth
from .errors import (
    DegenerateCdfError,
    DegenerateDesignError,
    DegenerateVarianceError,
    EIVError,
    InsufficientReplicationError,
    UnsupportedOperationError,
)
from .harness import (
    MonteCarloTable,
    ScenarioConfig,
    analyze_csv,
    generate_dataset,
    run_level_table,
    run_power_table,
    sensitivity_sweep,
)
from .moments import PolyFit, RegressionSample, error_moments, fit_polynomial
from .noise import GaussianNoise, LaplaceNoise, NoiseModel, TailDecay, noise_from_spec
from .statistic import QuadratureRule, WeightFunction, gauss_legendre_rule, test_stat
from .unknown_noise import EmpiricalNoise, ReplicatedSample, build_empirical_noise
from .wild import MomentMatchDist, make_match_dist

__version__ = "0.1.0"

__all__ = [
    "TestConfig", "TestReport", "critical_point", "reject_at", "run_test",
    "SmoothedCdf", "estimate_cdf", "kappa_alpha", "select_bandwidth",
    "DegenerateCdfError", "DegenerateDesignError", "DegenerateVarianceError",
    "EIVError", "InsufficientReplicationError", "UnsupportedOperationError",
    "MonteCarloTable", "ScenarioConfig", "analyze_csv", "generate_dataset",
    "run_level_table", "run_power_table", "sensitivity_sweep",
    "PolyFit", "RegressionSample", "error_moments", "fit_polynomial",
    "GaussianNoise", "LaplaceNoise", "NoiseModel", "TailDecay", "noise_from_spec",
    "QuadratureRule", "WeightFunction", "gauss_legendre_rule", "test_stat",
    "EmpiricalNoise", "ReplicatedSample", "build_empirical_noise",
    "MomentMatchDist", "make_match_dist",
]

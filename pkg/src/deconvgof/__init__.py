"""Deconvolution estimation of the squared L2 norm and L2 goodness-of-fit testing.

Observations are ``Y = X + eps`` with known noise law; the signal density is
unknown. The package estimates ``int f^2`` by a bias-reduced U-statistic,
tests ``H0: f = f0`` with an L2 statistic of the same kind, and ships the
Monte Carlo harness used to check both.
"""
from .errors import (ConfigError, DeconvError, DegeneratePerturbationError, NegativeDensityError,
                     NumericalError, OracleCapError, UnsupportedRegimeError, WeightOverflowError)
from .models import (DensityModel, NoiseModel, Sample, SmoothnessClass, SmoothnessDescriptor,
                     check_smoothness_membership, check_tail_condition, observe, sample)
from .spectral import KernelSpec, deconv_weight, phi_kernel
from .functional import (EstimationSetup, estimate_d, expected_dn, f_function, omega_sq,
                         select_estimation_bandwidth, solve_eq22, squared_norm)
from .gof import (TestOutcome, TestSetup, calibrate, decide, gof_test, l2_distance_sq,
                  select_test_params, test_statistic)
from .adversarial import PerturbationFamily, g_bump, perturbed_density, phi_g_bump, sample_theta
from .experiments import ExperimentConfig, ExperimentReport, preset, run_experiment

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "DeconvError", "DegeneratePerturbationError", "NegativeDensityError",
    "NumericalError", "OracleCapError", "UnsupportedRegimeError", "WeightOverflowError",
    "DensityModel", "NoiseModel", "Sample", "SmoothnessClass", "SmoothnessDescriptor",
    "check_smoothness_membership", "check_tail_condition", "observe", "sample",
    "KernelSpec", "deconv_weight", "phi_kernel",
    "EstimationSetup", "estimate_d", "expected_dn", "f_function", "omega_sq",
    "select_estimation_bandwidth", "solve_eq22", "squared_norm",
    "TestOutcome", "TestSetup", "calibrate", "decide", "gof_test", "l2_distance_sq",
    "select_test_params", "test_statistic",
    "PerturbationFamily", "g_bump", "perturbed_density", "phi_g_bump", "sample_theta",
    "ExperimentConfig", "ExperimentReport", "preset", "run_experiment",
]

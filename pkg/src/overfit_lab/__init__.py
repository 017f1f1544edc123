"""Univariate interpolators with minimal weighted total variation, spline
baselines, and the L_p risk experiments that separate tempered from
catastrophic overfitting."""

from .dataset import Dataset, dump_csv, load_csv
from .estimators import (ExtendedSplineInterpolator, LinearSplineInterpolator,
                         MinNormInterpolator)
from .experiments import (ExperimentConfig, SweepRecord, SweepResult,
                          catastrophic_statistic, detect_unfortunate_events,
                          gap_distribution_test, run_sweep, sample_grid,
                          sample_iid, tempered_statistic, trial_rng)
from .interpolators import (curvature, envelope, exact_spike, extended_spline,
                            linear_spline, special_points)
from .oracle import OracleResult, brute_force_minnorm, monte_carlo_risk, sup_distance
from .pwl import (PiecewiseLinear, ReluNetwork, difference, representation_cost,
                  to_network)
from .risk import (CustomNoise, GaussianNoise, RiskReport, gamma_bounds_check,
                   max_exp_inverse_moment, noise_moment, population_risk,
                   reconstruction_risk, risk_report,
                   symmetric_noise_inequality_check)
from .solver import MinNormResult, SolverOptions, minnorm_interpolate

__all__ = [
    "Dataset", "load_csv", "dump_csv",
    "PiecewiseLinear", "ReluNetwork", "difference", "representation_cost",
    "to_network",
    "linear_spline", "extended_spline", "curvature", "special_points",
    "envelope", "exact_spike",
    "SolverOptions", "MinNormResult", "minnorm_interpolate",
    "LinearSplineInterpolator", "ExtendedSplineInterpolator", "MinNormInterpolator",
    "GaussianNoise", "CustomNoise", "RiskReport", "noise_moment",
    "reconstruction_risk", "population_risk", "risk_report",
    "gamma_bounds_check", "max_exp_inverse_moment",
    "symmetric_noise_inequality_check",
    "ExperimentConfig", "SweepRecord", "SweepResult", "run_sweep",
    "sample_iid", "sample_grid", "trial_rng", "tempered_statistic",
    "catastrophic_statistic", "gap_distribution_test", "detect_unfortunate_events",
    "OracleResult", "brute_force_minnorm", "monte_carlo_risk", "sup_distance",
]

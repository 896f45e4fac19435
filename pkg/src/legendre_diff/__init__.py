"""Truncated Fourier-Legendre differentiation of noisy functions."""

from .basis import QuadratureRule, eval_phi, eval_phi_deriv, gauss_legendre, sup_norm_phi
from .errors import NumericalError, ValidationError
from .harness import (
    ExperimentConfig,
    NoiseConfig,
    RateFit,
    ResultsTable,
    component_scaling,
    fit_rate,
    read_csv,
    run_experiment,
    theoretical_exponent,
)
from .metrics import ErrorReport, MetricSpec, decompose, lq_norm
from .noise import NoiseSpec, lp_norm, perturb
from .series import (
    LegendreSeries,
    WienerParams,
    differentiate_coeffs,
    differentiate_coeffs_r,
    edge_function,
    evaluate,
    project,
    wiener_norm,
)
from .truncation import DerivativePlan, apply, choose_N, coefficient_count

__version__ = "0.1.0"

__all__ = [
    "DerivativePlan",
    "ErrorReport",
    "ExperimentConfig",
    "LegendreSeries",
    "MetricSpec",
    "NoiseConfig",
    "NoiseSpec",
    "NumericalError",
    "QuadratureRule",
    "RateFit",
    "ResultsTable",
    "ValidationError",
    "WienerParams",
    "apply",
    "choose_N",
    "coefficient_count",
    "component_scaling",
    "decompose",
    "differentiate_coeffs",
    "differentiate_coeffs_r",
    "edge_function",
    "eval_phi",
    "eval_phi_deriv",
    "evaluate",
    "fit_rate",
    "gauss_legendre",
    "lp_norm",
    "lq_norm",
    "perturb",
    "project",
    "read_csv",
    "run_experiment",
    "sup_norm_phi",
    "theoretical_exponent",
    "wiener_norm",
]

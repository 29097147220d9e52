"""Discrete spectra of complex Jacobi operators and Lieb-Thirring type eigenvalue sums.

The operator ``J`` is a finitely supported perturbation of the free Jacobi
operator ``J0`` on the integers.  Its discrete eigenvalues are computed as
zeros of a regularized perturbation determinant and cross-checked against
eigenvalues of finite sections.
"""
from .detfun import DetContext, G_matrix, det_via_G, gamma_p, log_g_bound, perturbation_determinant
from .experiments import ExperimentConfig, LTReport, generate_ensemble, load_report, run_experiment, save_report
from .functionals import FunctionalSpec, corollary_exponents, empirical_constant, lt_functional, sector_membership
from .linalg import eigenvalues, operator_norm, regularized_det, schatten_norm, singular_values
from .operator import PerturbationSpec, RealSequence, d_sequence, factorize, lp_norm, truncate
from .resolvent import BandPoint, dist_to_band, free_green, inverse_joukowski, multiplier_matrix, v_lambda_norm
from .zeros import (
    BlaschkeParams,
    SpectralPoint,
    blaschke_sum,
    count_zeros_in_disk,
    discrete_spectrum,
    find_zeros,
    jensen_check,
    truncated_spectrum,
    winding_number,
)

__all__ = [
    "DetContext",
    "G_matrix",
    "det_via_G",
    "gamma_p",
    "log_g_bound",
    "perturbation_determinant",
    "ExperimentConfig",
    "LTReport",
    "generate_ensemble",
    "load_report",
    "run_experiment",
    "save_report",
    "FunctionalSpec",
    "corollary_exponents",
    "empirical_constant",
    "lt_functional",
    "sector_membership",
    "eigenvalues",
    "operator_norm",
    "regularized_det",
    "schatten_norm",
    "singular_values",
    "PerturbationSpec",
    "RealSequence",
    "d_sequence",
    "factorize",
    "lp_norm",
    "truncate",
    "BandPoint",
    "dist_to_band",
    "free_green",
    "inverse_joukowski",
    "multiplier_matrix",
    "v_lambda_norm",
    "BlaschkeParams",
    "SpectralPoint",
    "blaschke_sum",
    "count_zeros_in_disk",
    "discrete_spectrum",
    "find_zeros",
    "jensen_check",
    "truncated_spectrum",
    "winding_number",
]

__version__ = "0.1.0"

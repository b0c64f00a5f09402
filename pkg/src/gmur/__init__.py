"""Entropic measurement-uncertainty bounds for Gaussian position/momentum measurements.

The package computes, in closed form, how much information is necessarily
lost when the sharp position and momentum statistics of a Gaussian state are
replaced by the marginals of one covariant joint measurement, and verifies
every closed form against brute-force optimization and Monte-Carlo oracles.
"""

from .entropy import (GaussianDist, Units, diff_entropy, dimensionless_state,
                      mc_rel_entropy, pur_bound_scalar, pur_bound_vector,
                      rel_entropy)
from .errors import ConvergenceError, DomainError, GmurError, InputError
from .linalg import PsdVerdict, herm_psd, logdet, sandwich, sym_eigen, sym_func
from .mur import (MurReport, Thresholds, c_inc_scalar, c_inc_vector,
                  divergence_scalar, divergence_vector, error_function_scalar,
                  error_function_vector, s_kernel, scale_invariance_transport,
                  state_dependent_bound_scalar)
from .observables import (GaussianBiObservable, ScalarCovariantObservable,
                          VectorCovariantObservable, biobs_char_function,
                          from_generating_state, marginals,
                          noisy_position_then_momentum, output_distribution,
                          validate_biobservable)
from .states import (GaussianState, PhysContext, ScalarMoments,
                     ValidationFailure, char_function, make_state_from_blocks,
                     make_state_with_scalar_variances, purity_info, rescale,
                     scalar_moments, validate_state)
from .verify import (McSummary, OptProblem, VerifyResult,
                     finite_diff_stationarity, verify_entropy_mc,
                     verify_scalar_divergence, verify_scalar_minimax,
                     verify_scalar_state_bound, verify_vector_minimax)

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError", "DomainError", "GmurError", "InputError",
    "PsdVerdict", "herm_psd", "logdet", "sandwich", "sym_eigen", "sym_func",
    "GaussianState", "PhysContext", "ScalarMoments", "ValidationFailure",
    "char_function", "make_state_from_blocks", "make_state_with_scalar_variances",
    "purity_info", "rescale", "scalar_moments", "validate_state",
    "GaussianDist", "Units", "diff_entropy", "dimensionless_state",
    "mc_rel_entropy", "pur_bound_scalar", "pur_bound_vector", "rel_entropy",
    "GaussianBiObservable", "ScalarCovariantObservable", "VectorCovariantObservable",
    "biobs_char_function", "from_generating_state", "marginals",
    "noisy_position_then_momentum", "output_distribution", "validate_biobservable",
    "MurReport", "Thresholds", "c_inc_scalar", "c_inc_vector",
    "divergence_scalar", "divergence_vector", "error_function_scalar",
    "error_function_vector", "s_kernel", "scale_invariance_transport",
    "state_dependent_bound_scalar",
    "McSummary", "OptProblem", "VerifyResult", "finite_diff_stationarity",
    "verify_entropy_mc", "verify_scalar_divergence", "verify_scalar_minimax",
    "verify_scalar_state_bound", "verify_vector_minimax",
]

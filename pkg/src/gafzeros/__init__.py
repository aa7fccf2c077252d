"""Zeros of Gaussian analytic functions on the sphere, torus, and plane.

Sampling of random sections, certified root finding, smallest-distance
(near-pair) statistics with their limit laws, and a k-point correlation
engine, with a command-line harness on top.
"""

__version__ = "0.1.0"

from .ensembles import (EnsembleSpec, KernelJet, Model, NonFiniteKernel,
                        RandomSection, kernel_jet, sample_section,
                        section_from_coefficients)
from .extremes import (EIGHTH_ROOT, PairEvent, Region, TrialConfig,
                       TrialRecord, collect_trial, filter_isolated,
                       k_smallest, pair_events, region)
from .geometry import (Chart, SurfacePoint, diameter, dist, dist_pairs,
                       rescale_factor, volume_density)
from .kacrice import (CorrelationResult, H, KernelConditionError,
                      QuadratureError, ball_integral_rho2, intensity,
                      limit_density, limit_survival, permanent, rho2_inf,
                      rho_k, rescaled_rho_k)
from .rng import stream_key, trial_stream
from .rootfind import (RootFindError, ZeroCountError, ZeroSet, compute_zeros,
                       verify_zeroset, zeros_gef, zeros_su2, zeros_torus)
from .stats import (CHI2_Q999, GofReport, chi_square_uniform, dispersion,
                    empirical_intensity, factorial_moment, ks_bound, ks_stat,
                    ks_two_sample)

__all__ = [
    "__version__",
    "EnsembleSpec", "KernelJet", "Model", "NonFiniteKernel", "RandomSection",
    "kernel_jet", "sample_section", "section_from_coefficients",
    "EIGHTH_ROOT", "PairEvent", "Region", "TrialConfig", "TrialRecord",
    "collect_trial", "filter_isolated", "k_smallest", "pair_events", "region",
    "Chart", "SurfacePoint", "diameter", "dist", "dist_pairs",
    "rescale_factor", "volume_density",
    "CorrelationResult", "H", "KernelConditionError", "QuadratureError",
    "ball_integral_rho2", "intensity", "limit_density", "limit_survival",
    "permanent", "rho2_inf", "rho_k", "rescaled_rho_k",
    "stream_key", "trial_stream",
    "RootFindError", "ZeroCountError", "ZeroSet", "compute_zeros",
    "verify_zeroset", "zeros_gef", "zeros_su2", "zeros_torus",
    "CHI2_Q999", "GofReport", "chi_square_uniform", "dispersion",
    "empirical_intensity", "factorial_moment", "ks_bound", "ks_stat",
    "ks_two_sample",
]

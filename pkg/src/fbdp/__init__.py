"""Numerics for time-fractional birth-and-death processes.

Mittag-Leffler evaluation, stable-subordinator samplers, Markov-renewal
and time-change simulators, a truncated spectral engine for transition
and survival probabilities, quasi-limiting/quasi-stationary
computations, and closed forms for the linear process.
"""

from ._backend import USING_NUMBA
from .errors import (AccuracyError, DomainError, FbdpError, NumericalError,
                     ResourceError, UnsupportedDomainError)
from .linear import LinearParams
from .mlf import ml_eval, ml_laplace_residual, ml_survival, ml_tail_expansion
from .model import RateSchedule, build_generator, classify, pi_weights
from .paths import estimate_pmf, simulate_renewal, simulate_timechange_marginal
from .quasi import qld_coefficients, qsd_classify, qsd_solve
from .spectral import decompose_rates, survival_prob, transition_prob
from .stable import RngStream, sample_ml_waiting, sample_stable

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "USING_NUMBA",
    "FbdpError", "DomainError", "UnsupportedDomainError", "AccuracyError",
    "ResourceError", "NumericalError",
    "ml_eval", "ml_survival", "ml_tail_expansion", "ml_laplace_residual",
    "RngStream", "sample_stable", "sample_ml_waiting",
    "RateSchedule", "pi_weights", "classify", "build_generator",
    "simulate_renewal", "simulate_timechange_marginal", "estimate_pmf",
    "decompose_rates", "transition_prob", "survival_prob",
    "qld_coefficients", "qsd_solve", "qsd_classify",
    "LinearParams",
]

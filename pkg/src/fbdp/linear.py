"""Closed forms for the linear process lambda_i = i*lambda, mu_i = i*mu.

These formulas serve as the primary cross-validation oracle for the
simulators and the spectral engine.  Two printed-source corrections are
applied, both verified against the classical closed forms and the
numerical survival curves: the supercritical non-extinction series
carries a plus sign inside the bracket (the geometric expansion of
(lam-mu)/(lam - mu*exp(-(lam-mu)t)) makes the minus variant negative at
t = 0), and the supercritical decay constant uses the convergent series
sum (mu/lam)^m / m = -ln(1 - mu/lam).
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import gamma as _gamma

from .errors import AccuracyError, DomainError
from .mlf import check_alpha, ml_eval, ml_survival
from .model import RateSchedule
from .paths import estimate_pmf
from .quasi import QldResult

__all__ = [
    "LinearParams",
    "CriticalWitnessReport",
    "p1j_classical",
    "survival_classical",
    "survival_fractional",
    "tail_constant_subcritical",
    "qld_linear",
    "supercritical_tail",
    "critical_no_qld_witness",
]

_SERIES_RTOL = 1e-14
_SERIES_MAX_TERMS = 100000


@dataclass(frozen=True)
class LinearParams:
    lam: float
    mu: float

    def __post_init__(self):
        if self.lam <= 0.0 or self.mu <= 0.0:
            raise DomainError("lam and mu must be positive")

    @property
    def regime(self):
        if self.lam < self.mu:
            return "subcritical"
        if self.lam > self.mu:
            return "supercritical"
        return "critical"

    def rates(self):
        return RateSchedule.linear(self.lam, self.mu)


def p1j_classical(params, j, t):
    """Classical transition probability p_{1,j}(t), j >= 1."""
    j = int(j)
    if j < 1:
        raise DomainError("j must be at least 1")
    if t < 0.0:
        raise DomainError("t must be nonnegative")
    lam, mu = params.lam, params.mu
    if t == 0.0:
        return 1.0 if j == 1 else 0.0
    if lam == mu:
        return (lam * t) ** (j - 1) / (1.0 + lam * t) ** (j + 1)
    r = lam - mu
    e = math.exp(-r * t)
    return ((lam * (1.0 - e)) ** (j - 1) * r * r * e
            / (lam - mu * e) ** (j + 1))


def _geometric_ml_sum(ratio, rate, alpha, t, n_terms):
    """sum_m ratio^m * E_alpha(-rate*m*t^alpha) with geometric tail control.

    Returns (partial_sum, relative_tail_bound).
    """
    cap = n_terms if n_terms is not None else _SERIES_MAX_TERMS
    total = 0.0
    power = 1.0
    tail = math.inf
    for m in range(1, cap + 1):
        power *= ratio
        total += power * ml_survival(alpha, rate * m, t)
        # ML factors are below 1 and decreasing in m
        tail = power * ratio / (1.0 - ratio)
        if tail < _SERIES_RTOL * total:
            break
    return total, tail / max(total, np.finfo(float).tiny)


def survival_classical(params, t):
    """Classical non-extinction probability P_1[T_0 > t]."""
    if t < 0.0:
        raise DomainError("t must be nonnegative")
    if t == 0.0:
        return 1.0
    lam, mu = params.lam, params.mu
    if lam == mu:
        return 1.0 / (1.0 + lam * t)
    total, _ = _geometric_exp_sum(params, t)
    if lam < mu:
        return (mu - lam) / lam * total
    return (lam - mu) / lam * (1.0 + total)


def _geometric_exp_sum(params, t):
    lam, mu = params.lam, params.mu
    ratio = lam / mu if lam < mu else mu / lam
    rate = abs(lam - mu)
    total = 0.0
    power = 1.0
    tail = math.inf
    for m in range(1, _SERIES_MAX_TERMS + 1):
        power *= ratio
        total += power * math.exp(-rate * m * t)
        tail = power * ratio / (1.0 - ratio)
        if tail < _SERIES_RTOL * max(total, np.finfo(float).tiny):
            break
    return total, tail


def survival_fractional(params, alpha, t, n_terms=None):
    """Fractional non-extinction probability P_1[T_{0,alpha} > t]."""
    alpha = check_alpha(alpha)
    if t < 0.0:
        raise DomainError("t must be nonnegative")
    if t == 0.0:
        return 1.0
    lam, mu = params.lam, params.mu
    if lam == mu:
        x = lam * t ** alpha

        def integrand(z):
            return math.exp(-z) * ml_eval(alpha, -x * z)

        value, err = quad(integrand, 0.0, np.inf,
                          epsabs=1e-12, epsrel=1e-10, limit=300)
        if err > 1e-7:
            raise AccuracyError(
                f"critical-case quadrature error {err:.3g}", achieved=err)
        return value
    if lam < mu:
        total, tail = _geometric_ml_sum(lam / mu, mu - lam, alpha, t, n_terms)
        value = (mu - lam) / lam * total
    else:
        total, tail = _geometric_ml_sum(mu / lam, lam - mu, alpha, t, n_terms)
        value = (lam - mu) / lam * (1.0 + total)
    if tail > 1e-10:
        raise AccuracyError(
            f"series tail bound {tail:.3g} above tolerance", achieved=tail)
    return value


def tail_constant_subcritical(params, alpha):
    """Limit of t^alpha * P_1[T_{0,alpha} > t] in the subcritical regime:
    -ln(1 - lam/mu) / (lam * Gamma(1 - alpha))."""
    alpha = check_alpha(alpha)
    if params.regime != "subcritical":
        raise DomainError("tail constant requires lam < mu")
    if alpha == 1.0:
        raise DomainError("classical decay is exponential; no t^alpha tail")
    return -math.log1p(-params.lam / params.mu) / (
        params.lam * _gamma(1.0 - alpha))


def qld_linear(params, i0, nmax):
    """Quasi-limiting distribution of the subcritical linear process.

    For i0 = 1 the pmf is proportional to (lam/mu)^j / j; general i0
    uses the Green-function coefficients.
    """
    if params.regime != "subcritical":
        return QldResult(i0=int(i0), nmax=int(nmax), exists=False,
                         coefficients=np.empty(0), pmf=np.empty(0),
                         tail_bound=math.inf,
                         reason=f"{params.regime} regime has no "
                                "quasi-limiting distribution")
    i0 = int(i0)
    nmax = int(nmax)
    if i0 < 1 or nmax < i0:
        raise DomainError("need 1 <= i0 <= nmax")
    lam, mu = params.lam, params.mu
    rho = lam / mu
    n = np.arange(1, nmax + 1)
    # P_{i,n} = (rho^n / (lam n)) * sum_{k=0}^{min(i0-1, n-1)} rho^-k
    cut = np.minimum(i0 - 1, n - 1)
    geo = (rho ** -(cut + 1.0) - 1.0) / (1.0 / rho - 1.0)
    coeff = rho ** n / (lam * n) * geo
    total = coeff.sum()
    tail = coeff[-1] * rho / (1.0 - rho)
    return QldResult(i0=i0, nmax=nmax, exists=True, coefficients=coeff,
                     pmf=coeff / total,
                     tail_bound=float(tail / (total + tail)))


def supercritical_tail(params, alpha):
    """(limit, rate): P_1[T_{0,alpha} > t] = limit + rate * t^-alpha + o.

    limit = (lam - mu)/lam; rate = -ln(1 - mu/lam)/(lam Gamma(1-alpha)),
    the convergent form of the printed series (see module docstring).
    """
    alpha = check_alpha(alpha)
    if params.regime != "supercritical":
        raise DomainError("supercritical tail requires lam > mu")
    if alpha == 1.0:
        raise DomainError("classical decay is exponential; no t^alpha tail")
    limit = (params.lam - params.mu) / params.lam
    rate = -math.log1p(-params.mu / params.lam) / (
        params.lam * _gamma(1.0 - alpha))
    return limit, rate


def iterated_log_scale(alpha, t):
    """f(t) = t^alpha (log log t^alpha)^(1-alpha); requires t^alpha > e."""
    alpha = check_alpha(alpha)
    x = t ** alpha
    if x <= math.e:
        raise DomainError("t^alpha must exceed e for the iterated log scale")
    return x * math.log(math.log(x)) ** (1.0 - alpha)


@dataclass(frozen=True)
class CriticalWitnessReport:
    """Evidence that the critical linear process has no quasi-limiting
    distribution: the scaled survival stays bounded while conditional
    mass on a fixed finite set drains away."""

    alpha: float
    times: np.ndarray
    survival: np.ndarray
    scaled_survival: np.ndarray
    conditional_mass: np.ndarray
    mass_states: int
    strictly_decreasing: bool
    source: str


def critical_no_qld_witness(params, alpha, t_grid, n_paths, seed,
                            mass_states=10, workers=1, spectral_M=400):
    """Conditional-mass drain test on the critical linear process.

    For alpha < 1 the marginals come from time-change Monte Carlo; the
    alpha = 1 negative control is computed exactly from the spectral
    truncation (where the conditional law converges instead).
    """
    alpha = check_alpha(alpha)
    if params.regime != "critical":
        raise DomainError("witness requires lam = mu")
    t_grid = np.asarray(t_grid, dtype=float)
    rates = params.rates()
    surv = np.empty(t_grid.shape)
    cond = np.empty(t_grid.shape)
    if alpha == 1.0:
        from .spectral import decompose_rates, survival_prob, transition_row
        dec = decompose_rates(rates, spectral_M)
        for idx, t in enumerate(t_grid):
            row = transition_row(dec, 1.0, 1, float(t))
            s = survival_prob(dec, 1.0, 1, float(t))
            surv[idx] = s
            cond[idx] = row[:mass_states].sum() / s
        source = "spectral"
    else:
        for idx, t in enumerate(t_grid):
            pmf = estimate_pmf("timechange", rates, alpha, 1, float(t),
                               n_paths, seed + idx, workers=workers)
            s = 1.0 - pmf.prob(0)
            surv[idx] = s
            cond[idx] = sum(pmf.prob(j)
                            for j in range(1, mass_states + 1)) / s
        source = "timechange"
    scaled = np.array([iterated_log_scale(alpha, t) * s
                       for t, s in zip(t_grid, surv)]) \
        if alpha < 1.0 else t_grid * surv
    decreasing = bool(np.all(np.diff(cond) < 0.0))
    return CriticalWitnessReport(alpha=alpha, times=t_grid, survival=surv,
                                 scaled_survival=scaled,
                                 conditional_mass=cond,
                                 mass_states=mass_states,
                                 strictly_decreasing=decreasing,
                                 source=source)

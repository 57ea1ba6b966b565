"""One-parameter Mittag-Leffler function E_a on the real line.

Evaluation strategy keyed on the rescaled magnitude s = |x|**(1/a) (the
natural cancellation scale of the power series):

  * s <= series_threshold : power series, Kahan-compensated summation
  * series_threshold < s < asym_threshold : adaptive quadrature of the
    complete-monotonicity integral representation
  * s >= asym_threshold : negative-axis asymptotic expansion, truncated
    at the smallest term

Only nonpositive arguments are supported for a < 1 (plus the exact
exponential at a = 1); that is the domain the process theory needs.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import rgamma

from .errors import AccuracyError, DomainError, UnsupportedDomainError

__all__ = [
    "MlEvalConfig",
    "DEFAULT_CONFIG",
    "check_alpha",
    "ml_eval",
    "ml_eval_grid",
    "ml_survival",
    "ml_tail_expansion",
    "ml_laplace_residual",
]


@dataclass(frozen=True)
class MlEvalConfig:
    """Switchover thresholds on the s = |x|**(1/alpha) scale."""

    series_threshold: float = 8.0
    asym_threshold: float = 35.0
    asym_terms: int = 60
    target_rel_err: float = 1e-10

    def __post_init__(self):
        if not self.series_threshold <= self.asym_threshold:
            raise DomainError("series_threshold must not exceed asym_threshold")
        if self.target_rel_err <= 0:
            raise DomainError("target_rel_err must be positive")
        if self.asym_terms < 2:
            raise DomainError("asym_terms must be at least 2")


DEFAULT_CONFIG = MlEvalConfig()

_SERIES_COEFF_CACHE = {}


def check_alpha(alpha):
    alpha = float(alpha)
    if not 0.0 < alpha <= 1.0 or math.isnan(alpha):
        raise DomainError(f"fractional order must lie in (0, 1], got {alpha}")
    return alpha


def _series_coeffs(alpha, n):
    """1 / Gamma(alpha * k + 1) for k = 0..n-1, cached per order."""
    cached = _SERIES_COEFF_CACHE.get(alpha)
    if cached is None or cached.shape[0] < n:
        k = np.arange(max(n, 64))
        cached = rgamma(alpha * k + 1.0)
        _SERIES_COEFF_CACHE[alpha] = cached
    return cached


def _series(alpha, x, s):
    # enough terms that |x|^k / Gamma(ak+1) has fallen ~30 digits below the peak
    n = int((3.0 * s + 40.0) / alpha) + 8
    c = _series_coeffs(alpha, n)
    total = 0.0
    comp = 0.0
    power = 1.0
    for k in range(n):
        term = power * c[k]
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        power *= x
        if power == 0.0:
            break
    return total


def _monotone_integral(alpha, x, s):
    """E_a(-x) for x > 0 via the spectral (Laplace-Stieltjes) density
    K(r) = sin(a*pi)/pi * r^(a-1) / (r^2a + 2 r^a cos(a*pi) + 1)."""
    sin_ap = math.sin(alpha * math.pi)
    cos_ap = math.cos(alpha * math.pi)

    def near(v):
        # r = v**(1/alpha) on [0, 1]; substitution removes the r^(a-1) factor
        return math.exp(-s * v ** (1.0 / alpha)) / (v * v + 2.0 * v * cos_ap + 1.0)

    def far(r):
        ra = r ** alpha
        return (r ** (alpha - 1.0) * math.exp(-s * r)
                / (ra * ra + 2.0 * ra * cos_ap + 1.0))

    i1, _ = quad(near, 0.0, 1.0, epsabs=1e-14, epsrel=1e-12, limit=200)
    i2, _ = quad(far, 1.0, np.inf, epsabs=1e-14, epsrel=1e-12, limit=200)
    return sin_ap / math.pi * (i1 / alpha + i2)


def _asymptotic(alpha, x, max_terms):
    """Sum_m (-1)^(m+1) x^-m / Gamma(1 - m*alpha), truncated at the
    smallest nonzero term (optimal truncation).

    Returns (value, error_estimate); the first omitted term bounds the
    truncation error for this alternating expansion.
    """
    total = 0.0
    prev_mag = math.inf
    inv = 1.0 / x
    power = 1.0
    sign = 1.0
    err = math.inf
    for m in range(1, max_terms + 1):
        power *= inv
        coeff = rgamma(1.0 - m * alpha)
        term = sign * power * coeff
        sign = -sign
        mag = abs(term)
        if mag > prev_mag:
            err = mag
            break
        total += term
        if mag > 0.0:
            prev_mag = mag
            err = mag
    return total, err


def _eval_negative(alpha, x, cfg):
    # x < 0, 0 < alpha < 1
    mag = -x
    s = mag ** (1.0 / alpha)
    if s <= cfg.series_threshold:
        return _series(alpha, x, s)
    if s >= cfg.asym_threshold:
        value, err = _asymptotic(alpha, mag, cfg.asym_terms)
        # for small alpha, 1/|x| decays slowly even when s is large;
        # reject the expansion unless optimal truncation met the target
        if err <= cfg.target_rel_err * abs(value):
            return value
    return _monotone_integral(alpha, mag, s)


def ml_eval(alpha, x, cfg=DEFAULT_CONFIG):
    """E_alpha(x) for real x <= 0 (any x when alpha = 1)."""
    alpha = check_alpha(alpha)
    x = float(x)
    if alpha == 1.0:
        return math.exp(x)
    if x > 0.0:
        raise UnsupportedDomainError(
            "positive arguments are not supported for alpha < 1")
    if x == 0.0:
        return 1.0
    return _eval_negative(alpha, x, cfg)


def ml_eval_grid(alpha, xs, cfg=DEFAULT_CONFIG):
    """Vectorized ml_eval over a 1-d array of nonpositive arguments."""
    alpha = check_alpha(alpha)
    xs = np.asarray(xs, dtype=float)
    if alpha == 1.0:
        return np.exp(xs)
    if np.any(xs > 0.0):
        raise UnsupportedDomainError(
            "positive arguments are not supported for alpha < 1")
    out = np.empty(xs.shape)
    flat = xs.ravel()
    res = out.ravel()
    for idx in range(flat.shape[0]):
        x = flat[idx]
        res[idx] = 1.0 if x == 0.0 else _eval_negative(alpha, x, cfg)
    return out


def ml_survival(alpha, theta, t, cfg=DEFAULT_CONFIG):
    """E_alpha(-theta * t**alpha); the fractional survival kernel."""
    alpha = check_alpha(alpha)
    if theta <= 0.0:
        raise DomainError("theta must be positive")
    if t < 0.0:
        raise DomainError("t must be nonnegative")
    if t == 0.0:
        return 1.0
    if alpha == 1.0:
        return math.exp(-theta * t)
    return _eval_negative(alpha, -theta * t ** alpha, cfg)


def ml_tail_expansion(alpha, theta, t, n_terms, cfg=DEFAULT_CONFIG):
    """Partial sum of the negative-axis tail expansion at x = theta*t**alpha.

    Terms whose reciprocal gamma sits on a nonpositive integer contribute
    exactly zero (the alpha = 1/2 mechanism).
    """
    alpha = check_alpha(alpha)
    if theta <= 0.0 or t <= 0.0:
        raise DomainError("theta and t must be positive")
    if not 1 <= n_terms <= cfg.asym_terms:
        raise DomainError(f"n_terms must lie in [1, {cfg.asym_terms}]")
    x = theta * t ** alpha
    if x < cfg.asym_threshold:
        raise AccuracyError(
            f"theta*t^alpha = {x:.3g} below asymptotic threshold "
            f"{cfg.asym_threshold}", achieved=x)
    total = 0.0
    power = 1.0
    sign = 1.0
    for m in range(1, n_terms + 1):
        power /= x
        total += sign * power * rgamma(1.0 - m * alpha)
        sign = -sign
    return total


def ml_laplace_residual(alpha, theta, s, cfg=DEFAULT_CONFIG,
                        epsabs=1e-12, epsrel=1e-10):
    """|quadrature of int_0^inf e^{-st} E_a(-theta t^a) dt - s^(a-1)/(s^a+theta)|.

    Self-test of the Laplace-transform identity behind the fractional
    relaxation equation.
    """
    alpha = check_alpha(alpha)
    if theta <= 0.0 or s <= 0.0:
        raise DomainError("theta and s must be positive")

    upper = max(80.0 / s, 80.0)

    def integrand(t):
        return math.exp(-s * t) * ml_survival(alpha, theta, t, cfg)

    value, err = quad(integrand, 0.0, upper,
                      epsabs=epsabs, epsrel=epsrel, limit=400)
    if err > 1e-7:
        raise AccuracyError(
            f"quadrature error estimate {err:.3g} too large", achieved=err)
    exact = s ** (alpha - 1.0) / (s ** alpha + theta)
    return abs(value - exact)

"""Quasi-limiting and quasi-stationary distributions.

The fractional quasi-limiting (Yaglom) distribution has the closed
Green-function form P_{i,n} = pi_n (1/mu_1 + sum_{j <= min(i-1, n-1)}
1/(lambda_j pi_j)); the sum index stops at i-1, which the truncated
Green function confirms.  Quasi-stationary laws solve nu Q = -theta nu
with theta = mu_1 nu_1 and are the same for every fractional order.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma as _gamma

from .errors import DomainError
from .mlf import check_alpha, ml_survival
from .model import classify, pi_weights
from .spectral import _ml_factors

__all__ = [
    "QldResult",
    "QsdResult",
    "CIntegrals",
    "qld_coefficients",
    "qld_limit_check",
    "c_integrals",
    "rate_constant",
    "qsd_solve",
    "qsd_classify",
    "qsd_stationarity_check",
]

# forward recursion switches to extended precision above this index
_QSD_LONGDOUBLE_ABOVE = 10**3


@dataclass(frozen=True)
class QldResult:
    """Quasi-limiting distribution truncated at nmax.

    exists is False when the normalizing series diverges; coefficients
    and pmf are then empty.  tail_bound estimates the relative mass
    beyond nmax by geometric extrapolation.
    """

    i0: int
    nmax: int
    exists: bool
    coefficients: np.ndarray
    pmf: np.ndarray
    tail_bound: float
    reason: str = ""

    def prob(self, n):
        n = int(n)
        if not self.exists:
            raise DomainError("no quasi-limiting distribution: " + self.reason)
        if not 1 <= n <= self.nmax:
            raise DomainError(f"state {n} outside 1..{self.nmax}")
        return float(self.pmf[n - 1])


@dataclass(frozen=True)
class QsdResult:
    """Candidate quasi-stationary law for a fixed decay parameter theta."""

    theta: float
    nu: np.ndarray
    residual: float
    outcome: str  # "qsd", "negative", "divergent"

    def prob(self, j):
        j = int(j)
        if not 1 <= j <= self.nu.shape[0]:
            raise DomainError(f"state {j} outside 1..{self.nu.shape[0]}")
        return float(self.nu[j - 1])


@dataclass(frozen=True)
class CIntegrals:
    """Discrete spectral functionals C_{i,j,k} = sum_m gamma_m Q_m(i)
    Q_m(j) / theta_m^k."""

    i: int
    j: int
    values: dict

    def at(self, k):
        return self.values[int(k)]


def qld_coefficients(rates, i0, nmax):
    """Green-function coefficients and normalized QLD started from i0."""
    i0 = int(i0)
    nmax = int(nmax)
    if i0 < 1:
        raise DomainError("i0 must be at least 1")
    if nmax < i0:
        raise DomainError("nmax must be at least i0")
    rates._check_state(nmax)
    verdict = classify(rates)
    if rates.max_state is None and verdict.status["B"] != "convergent":
        return QldResult(i0=i0, nmax=nmax, exists=False,
                         coefficients=np.empty(0), pmf=np.empty(0),
                         tail_bound=math.inf,
                         reason=f"pi series {verdict.status['B']}")
    pi = pi_weights(rates, nmax)
    b = rates.birth_array(nmax)
    mu1 = rates.death(1)
    inv_lp = 1.0 / (b[1:] * pi.values)         # 1/(lambda_j pi_j), j=1..nmax
    prefix = np.concatenate(([0.0], np.cumsum(inv_lp)))
    cut = np.minimum(np.arange(nmax), i0 - 1)  # min(i0-1, n-1) for n=1..nmax
    coeff = pi.values * (1.0 / mu1 + prefix[cut])
    total = coeff.sum()
    # geometric tail estimate from the last pi ratios; the bracket factor
    # is constant once n > i0
    w = min(20, nmax - 1)
    r = float((pi.values[-w:] / pi.values[-w - 1:-1]).max()) if w else 1.0
    tail = coeff[-1] * r / (1.0 - r) if r < 1.0 else math.inf
    return QldResult(i0=i0, nmax=nmax, exists=True,
                     coefficients=coeff, pmf=coeff / total,
                     tail_bound=float(tail / (total + tail)))


def qld_limit_check(dec, alpha, i0, j, t_grid):
    """Conditional probabilities P_i0[N=j | T_0 > t] along a time grid."""
    alpha = check_alpha(alpha)
    dec.check_indices(i0, j)
    mu1 = dec.gen.rates.death(1)
    qi = dec.weights[int(i0) - 1, :]
    qj = dec.weights[int(j) - 1, :]
    out = np.empty(len(t_grid))
    for idx, t in enumerate(t_grid):
        ml = _ml_factors(dec, alpha, float(t))
        num = dec.pi.at(j) * np.sum(ml * qi * qj * dec.gamma_mass)
        den = mu1 * np.sum(ml * qi * dec.gamma_mass / dec.thetas)
        out[idx] = num / den
    return out


def c_integrals(dec, i, j, k_max=4):
    """C_{i,j,k} for k = 0..k_max on the discrete spectrum."""
    k_max = int(k_max)
    if not 0 <= k_max <= 4:
        raise DomainError("k_max must lie in 0..4")
    dec.check_indices(i, j)
    qi = dec.weights[int(i) - 1, :]
    qj = dec.weights[int(j) - 1, :]
    base = dec.gamma_mass * qi * qj
    values = {}
    for k in range(k_max + 1):
        values[k] = float(np.sum(base / dec.thetas ** k))
    return CIntegrals(i=int(i), j=int(j), values=values)


def rate_constant(dec, alpha, i, j):
    """Constant in the t^{-alpha} (or t^{-1} at alpha = 1/2) correction of
    the conditional probability toward its Yaglom limit."""
    alpha = check_alpha(alpha)
    if alpha >= 1.0:
        raise DomainError("rate constants require alpha < 1")
    dec.check_indices(i, j)
    mu1 = dec.gen.rates.death(1)
    ci1 = c_integrals(dec, i, 1)
    cij = c_integrals(dec, i, j)
    limit = dec.pi.at(j) / mu1 * cij.at(1) / ci1.at(2)
    if alpha == 0.5:
        return 0.5 * limit * (ci1.at(4) / ci1.at(2) - cij.at(3) / cij.at(1))
    factor = _gamma(1.0 - alpha) / _gamma(1.0 - 2.0 * alpha)
    return limit * factor * (ci1.at(3) / ci1.at(2) - cij.at(2) / cij.at(1))


def qsd_solve(rates, theta, nmax):
    """Forward recursion for the quasi-stationary system at decay theta.

    nu_1 = theta / mu_1 and mu_{j+1} nu_{j+1} = (lambda_j + mu_j - theta)
    nu_j - lambda_{j-1} nu_{j-1}.  Negative entries or a divergent sum
    mean theta admits no qsd.
    """
    nmax = int(nmax)
    if nmax < 2:
        raise DomainError("nmax must be at least 2")
    if theta < 0.0:
        raise DomainError("theta must be nonnegative")
    rates._check_state(nmax)
    b = rates.birth_array(nmax)
    d = rates.death_array(nmax + 1 if rates.max_state is None
                          else min(nmax + 1, rates.max_state))
    if d.shape[0] < nmax + 1:
        d = np.concatenate([d, [rates.death(nmax)]])  # unused guard slot
    th = np.longdouble(theta)
    nu = np.zeros(nmax, dtype=np.longdouble)
    nu[0] = th / np.longdouble(d[1])
    if nmax >= 2:
        nu[1] = (np.longdouble(b[1] + d[1]) - th) * nu[0] / np.longdouble(d[2])
    for j in range(2, nmax):
        nu[j] = ((np.longdouble(b[j] + d[j]) - th) * nu[j - 1]
                 - np.longdouble(b[j - 1]) * nu[j - 2]) / np.longdouble(d[j + 1])
    fl = nu.astype(float)
    floor = -1e-12 * float(np.max(np.abs(fl))) if fl.size else 0.0
    if theta == 0.0 or np.any(fl < floor):
        return QsdResult(theta=float(theta), nu=np.maximum(fl, 0.0),
                         residual=math.inf, outcome="negative")
    tail = fl[-20:]
    growing = np.all(tail[1:] >= tail[:-1]) and tail[-1] > 0
    total = float(nu.sum())
    if growing or not math.isfinite(total) or total <= 0.0:
        return QsdResult(theta=float(theta), nu=fl, residual=math.inf,
                         outcome="divergent")
    norm = fl / total
    res = _recursion_residual(b, d, theta, norm)
    return QsdResult(theta=float(theta), nu=norm, residual=res,
                     outcome="qsd")


def _recursion_residual(b, d, theta, nu):
    """Max violation of nu Q = -theta nu over interior states, relative
    to the largest entry."""
    n = nu.shape[0]
    scale = float(np.max(nu))
    worst = 0.0
    # row n is excluded: it carries the truncation error by construction
    for j in range(1, n):
        lhs = -theta * nu[j - 1]
        rhs = -(b[j] + d[j]) * nu[j - 1] + d[j + 1] * nu[j]
        if j >= 2:
            rhs += b[j - 1] * nu[j - 2]
        worst = max(worst, abs(lhs - rhs) / scale)
    return worst


def qsd_classify(rates, tolerance=1e-12, M=200):
    """Van Doorn classification of the quasi-stationary family."""
    from .spectral import decompose_rates
    verdict = classify(rates, tolerance=tolerance)
    d_status = verdict.status["D"]
    if d_status == "convergent":
        return "unique"
    if d_status == "undecided":
        return "undecided"
    theta_small = decompose_rates(rates, M).thetas[0]
    theta_big = decompose_rates(rates, 2 * M).thetas[0]
    if theta_big < 0.6 * theta_small or theta_big < tolerance ** 0.5:
        # theta_1(M) collapsing toward zero: no positive decay parameter
        return "none"
    return "family"


def qsd_stationarity_check(dec, alpha, nu, theta, t_grid):
    """Max deviation of the quasi-stationarity identity over j and t.

    Checks |sum_i nu_i p_{i,j,alpha}(t) - nu_j E_alpha(-theta t^alpha)|.
    """
    alpha = check_alpha(alpha)
    nu = np.asarray(nu, dtype=float)
    if nu.shape[0] != dec.M:
        raise DomainError("nu length must match the truncation size")
    # s_k = sum_i nu_i Q_k(i), shared across times
    s = nu @ dec.weights
    worst = 0.0
    for t in t_grid:
        t = float(t)
        ml = _ml_factors(dec, alpha, t)
        lhs = dec.pi.values * (dec.weights @ (ml * dec.gamma_mass * s))
        surv = ml_survival(alpha, theta, t) if t > 0.0 else 1.0
        worst = max(worst, float(np.max(np.abs(lhs - nu * surv))))
    return worst

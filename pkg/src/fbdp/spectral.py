"""Spectral engine for the truncated killed generator.

Conjugating the killed generator by diag(sqrt(pi)) gives a symmetric
tridiagonal matrix, so its spectrum is real and the eigenvectors encode
the birth-death polynomials: column k rescales to Q_theta_k with
Q_theta_k(1) = 1, and the squared first components are the discrete
spectral masses.  Transition and survival probabilities then follow by
replacing e^(-theta t) with the Mittag-Leffler kernel.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels as _k
from .errors import DomainError, NumericalError
from .mlf import check_alpha, ml_eval_grid
from .model import GeneratorMatrix, PiWeights, build_generator, pi_weights
from .paths import MarginalPmf

__all__ = [
    "SpectralDecomposition",
    "PolynomialTable",
    "decompose",
    "decompose_rates",
    "eval_polynomial",
    "transition_prob",
    "transition_row",
    "transition_pmf",
    "survival_prob",
    "green_function",
    "forward_residual",
]


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigendata of -Q on states 1..M.

    thetas ascend and are strictly positive; weights[j-1, k] is the
    polynomial value Q_theta_k(j); gamma_mass[k] is the discrete
    spectral mass at theta_k (masses sum to 1).
    """

    gen: GeneratorMatrix
    pi: PiWeights
    thetas: np.ndarray
    weights: np.ndarray
    gamma_mass: np.ndarray

    @property
    def M(self):
        return self.gen.M

    def check_indices(self, *states):
        for i in states:
            if not 1 <= int(i) <= self.M:
                raise DomainError(f"state {i} outside truncation 1..{self.M}")


@dataclass(frozen=True)
class PolynomialTable:
    """Birth-death polynomial values Q_theta(0..i_max)."""

    theta: float
    values: np.ndarray


def decompose(gen, pi=None):
    """Spectral decomposition of the truncated killed generator."""
    if pi is None:
        pi = pi_weights(gen.rates, gen.M)
    if pi.M != gen.M:
        raise DomainError("pi weights and generator sizes differ")
    off = -np.sqrt(gen.sup * gen.sub) if gen.M > 1 else np.empty(0)
    try:
        thetas, vecs = _k.tridiag_eig(-gen.diag.copy(), off)
    except RuntimeError as exc:
        raise NumericalError(str(exc)) from exc
    thetas = np.asarray(thetas)
    vecs = np.asarray(vecs)
    if thetas[0] <= 0.0:
        raise NumericalError(
            f"nonpositive eigenvalue {thetas[0]} in the killed generator")
    first = vecs[0, :]
    sqrt_pi = np.sqrt(pi.values)
    # modes whose spectral mass underflows contribute nothing at the
    # states of interest; drop them rather than divide by a denormal
    gamma_mass = first ** 2
    alive = gamma_mass > 1e-280
    if not np.any(alive):
        raise NumericalError("all eigenvectors vanish at state 1")
    gamma_mass = np.where(alive, gamma_mass, 0.0)
    # rows this deep carry no representable probability mass
    sqrt_pi_safe = np.where(sqrt_pi < 1e-150, 0.0, sqrt_pi)
    denom = sqrt_pi_safe[:, None] * np.where(alive, first, 0.0)[None, :]
    with np.errstate(over="ignore"):
        weights = np.divide(vecs, denom, out=np.zeros_like(vecs),
                            where=denom != 0.0)
    return SpectralDecomposition(gen=gen, pi=pi, thetas=thetas,
                                 weights=weights, gamma_mass=gamma_mass)


def decompose_rates(rates, M, boundary_policy="reflect_at_M"):
    """Convenience: build the generator and decompose in one call."""
    return decompose(build_generator(rates, M, boundary_policy))


def eval_polynomial(rates, theta, i_max):
    """Q_theta(i) for i = 0..i_max by the three-term recursion."""
    i_max = int(i_max)
    if i_max < 1:
        raise DomainError("i_max must be at least 1")
    rates._check_state(i_max)
    values = np.empty(i_max + 1)
    values[0] = 0.0
    values[1] = 1.0
    for i in range(1, i_max):
        bi = rates.birth(i)
        di = rates.death(i)
        values[i + 1] = ((bi + di - theta) * values[i]
                         - di * values[i - 1]) / bi
    return PolynomialTable(theta=float(theta), values=values)


def _ml_factors(dec, alpha, t):
    """E_alpha(-theta_k t^alpha) across the spectrum."""
    if t == 0.0:
        return np.ones(dec.M)
    if alpha == 1.0:
        return np.exp(-dec.thetas * t)
    return ml_eval_grid(alpha, -dec.thetas * t ** alpha)


def transition_prob(dec, alpha, i, j, t):
    """p_{i,j,alpha}(t) from the discrete spectral representation."""
    alpha = check_alpha(alpha)
    dec.check_indices(i, j)
    if t < 0.0:
        raise DomainError("t must be nonnegative")
    ml = _ml_factors(dec, alpha, t)
    qi = dec.weights[int(i) - 1, :]
    qj = dec.weights[int(j) - 1, :]
    return float(dec.pi.at(j) * np.sum(ml * qi * qj * dec.gamma_mass))


def transition_row(dec, alpha, i, t):
    """All of p_{i,j,alpha}(t) for j = 1..M as an array."""
    alpha = check_alpha(alpha)
    dec.check_indices(i)
    if t < 0.0:
        raise DomainError("t must be nonnegative")
    ml = _ml_factors(dec, alpha, t)
    qi = dec.weights[int(i) - 1, :]
    coeff = ml * qi * dec.gamma_mass
    return dec.pi.values * (dec.weights @ coeff)


def survival_prob(dec, alpha, i, t):
    """P_i[T_0 > t] = mu_1 * sum_k E_alpha(-theta_k t^alpha) Q_k(i)
    gamma_k / theta_k."""
    alpha = check_alpha(alpha)
    dec.check_indices(i)
    if t < 0.0:
        raise DomainError("t must be nonnegative")
    mu1 = dec.gen.rates.death(1)
    ml = _ml_factors(dec, alpha, t)
    qi = dec.weights[int(i) - 1, :]
    return float(mu1 * np.sum(ml * qi * dec.gamma_mass / dec.thetas))


def transition_pmf(dec, alpha, i, t):
    """Exact marginal over states 0..M (state 0 carries absorbed mass)."""
    row = transition_row(dec, alpha, i, t)
    mass = {0: float(1.0 - row.sum())}
    for j, p in enumerate(row, start=1):
        mass[j] = float(p)
    stderr = {j: 0.0 for j in mass}
    return MarginalPmf(time=float(t), mass=mass, stderr=stderr,
                       n_paths=0, source="spectral")


def green_function(gen):
    """(-Q)^{-1}; entry (i, j) is the expected classical occupation time
    of j started from i before absorption (matrix indexed from state 1)."""
    q = gen.dense()
    try:
        return np.linalg.inv(-q)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"singular killed generator: {exc}") from exc


def _gl_weights(alpha, n):
    """Grunwald-Letnikov coefficients (-1)^k binom(alpha, k), k = 0..n."""
    g = np.empty(n + 1)
    g[0] = 1.0
    for k in range(1, n + 1):
        g[k] = g[k - 1] * (k - 1.0 - alpha) / k
    return g


def forward_residual(dec, alpha, i, j, t, h):
    """Residual of the fractional forward equation at (i, j, t).

    The Caputo derivative of p_{i,j,alpha} is discretized on the full
    memory grid t, t-h, ..., 0 with first-order Grunwald-Letnikov
    weights and compared against the generator side of the equation.
    """
    alpha = check_alpha(alpha)
    dec.check_indices(i, j)
    if t <= 0.0 or h <= 0.0:
        raise DomainError("t and h must be positive")
    n = int(round(t / h))
    if abs(n * h - t) > 1e-9 * t or n < 1:
        raise DomainError("t must be a positive multiple of h")
    g = _gl_weights(alpha, n)
    rows = np.array([transition_row(dec, alpha, i, t - k * h)
                     for k in range(n + 1)])
    f0 = np.zeros(dec.M)
    f0[int(i) - 1] = 1.0
    deriv = h ** (-alpha) * g @ (rows[:, int(j) - 1] - f0[int(j) - 1])
    rhs = (rows[0] @ dec.gen.dense())[int(j) - 1]
    return abs(float(deriv) - float(rhs))

"""One-sided stable subordinator sampling and its inverse.

The subordinator D has Laplace transform E[exp(-s D(1))] = exp(-s**alpha)
and is self-similar of index 1/alpha, so an increment over an operational
step delta is delta**(1/alpha) times a standard draw.  The inverse process
E(t) (first passage of D above level t) has the marginal (t/S)**alpha and
is realized pathwise by grid inversion.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels as _k
from .errors import DomainError, ResourceError
from .mlf import check_alpha

__all__ = [
    "RngStream",
    "SubordinatorGrid",
    "sample_stable",
    "sample_stable_batch",
    "sample_inverse_at",
    "build_grid",
    "invert_grid",
    "sample_ml_waiting",
]

_U = np.uint64
_MASK = (1 << 64) - 1

# default cap on subordinator grid steps
GRID_STEP_CAP = 10**8


@dataclass
class RngStream:
    """One splittable counter-based RNG stream.

    The same (master_seed, stream_id) always reproduces the identical
    variate sequence; distinct stream ids give independent streams.
    """

    master_seed: int
    stream_id: int = 0
    _state: np.uint64 = field(init=False, repr=False)
    _gamma: np.uint64 = field(init=False, repr=False)

    def __post_init__(self):
        ms = _U(int(self.master_seed) & _MASK)
        sid = _U(int(self.stream_id) & _MASK)
        self._state = _U(_k.stream_state(ms, sid))
        self._gamma = _U(_k.stream_gamma(ms, sid))

    def uniform(self):
        """Next uniform variate, strictly inside (0, 1)."""
        state, u = _k.next_u01(self._state, self._gamma)
        self._state = _U(state)
        return float(u)

    def exponential(self, rate=1.0):
        if rate <= 0.0:
            raise DomainError("rate must be positive")
        return -math.log(self.uniform()) / rate

    def spawn(self, stream_id):
        """Fresh stream of the same master seed."""
        return RngStream(self.master_seed, stream_id)


@dataclass
class SubordinatorGrid:
    """Trajectory of D sampled on an operational-time lattice.

    values[k] = D(k * operational_step); cumulative sums of nonnegative
    increments, with the last value beyond the physical horizon.
    """

    alpha: float
    operational_step: float
    horizon: float
    values: np.ndarray

    def __post_init__(self):
        if self.values[0] != 0.0:
            raise DomainError("grid must start at D(0) = 0")
        if np.any(np.diff(self.values) < 0.0):
            raise DomainError("grid values must be nondecreasing")
        if self.values[-1] <= self.horizon:
            raise DomainError("grid must extend past the horizon")


def sample_stable(alpha, rng):
    """One draw of the standard one-sided stable variable S.

    Laplace transform exp(-s**alpha); for alpha = 1 the law is the point
    mass at 1.
    """
    alpha = check_alpha(alpha)
    if alpha == 1.0:
        return 1.0
    state, s = _k.draw_stable(alpha, rng._state, rng._gamma)
    rng._state = _U(state)
    return float(s)


def sample_stable_batch(alpha, n, rng):
    """n draws as an array; consumes the stream like n sample_stable calls."""
    alpha = check_alpha(alpha)
    if n < 0:
        raise DomainError("n must be nonnegative")
    if alpha == 1.0:
        return np.ones(n)
    out, state = _k.stable_batch(alpha, n, rng._state, rng._gamma)
    rng._state = _U(state)
    return out


def sample_inverse_at(alpha, t, rng):
    """One draw of the inverse subordinator marginal E(t).

    Uses self-similarity: E(t) equals (t / S)**alpha in law.
    """
    alpha = check_alpha(alpha)
    if t < 0.0:
        raise DomainError("t must be nonnegative")
    if t == 0.0:
        return 0.0
    if alpha == 1.0:
        return float(t)
    s = sample_stable(alpha, rng)
    return (t / s) ** alpha


def build_grid(alpha, delta, horizon, rng, step_cap=GRID_STEP_CAP):
    """Sample D on the lattice k*delta until it exceeds the horizon."""
    alpha = check_alpha(alpha)
    if delta <= 0.0 or horizon <= 0.0:
        raise DomainError("delta and horizon must be positive")
    values, n, ok = _k.subordinator_values(
        alpha, delta, horizon, rng._state, rng._gamma, step_cap)
    if alpha < 1.0:
        # two uniforms per stable draw, one draw per increment
        with np.errstate(over="ignore"):
            rng._state = _U(rng._state + _U(2 * (n - 1)) * rng._gamma)
    if not ok:
        raise ResourceError(
            f"subordinator grid exceeded {step_cap} steps before the horizon")
    return SubordinatorGrid(alpha=alpha, operational_step=delta,
                            horizon=horizon, values=np.asarray(values))


def invert_grid(grid, t):
    """E(t) from a sampled grid: operational_step * min{k : D_k > t}."""
    if t < 0.0 or t > grid.horizon:
        raise DomainError(f"t = {t} outside [0, horizon = {grid.horizon}]")
    k = int(np.searchsorted(grid.values, t, side="right"))
    return grid.operational_step * k


def sample_ml_waiting(alpha, rate, rng):
    """Mittag-Leffler waiting time: P[T > t] = E_alpha(-rate * t**alpha).

    Constructed as X**(1/alpha) * S with X exponential(rate); for
    alpha = 1 this is plain exponential.
    """
    alpha = check_alpha(alpha)
    if rate <= 0.0:
        raise DomainError("rate must be positive")
    x = rng.exponential(rate)
    if alpha == 1.0:
        return x
    s = sample_stable(alpha, rng)
    return x ** (1.0 / alpha) * s

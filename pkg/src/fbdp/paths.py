"""Trajectory simulation and Monte Carlo marginal estimation.

Two equivalent routes generate the fractional process: the Markov
renewal construction (Mittag-Leffler holding times on the embedded
chain) and the time change (classical chain run on the inverse stable
subordinator clock).  Single-path functions consume an RngStream draw by
draw and match the batched kernels bit for bit; the batched estimators
assign stream ids by global path index, so results never depend on how
work is chunked across processes.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels as _k
from .errors import DomainError, ResourceError
from .mlf import check_alpha
from .model import embedded_step_prob
from .stable import (build_grid, invert_grid, sample_inverse_at,
                     sample_ml_waiting)

__all__ = [
    "PathSample",
    "MarginalPmf",
    "simulate_renewal",
    "simulate_timechange_marginal",
    "simulate_timechange_path",
    "estimate_pmf",
]

DEFAULT_MAX_JUMPS = 10**7


@dataclass(frozen=True)
class PathSample:
    """One trajectory: embedded states, jump epochs, absorption status."""

    states: np.ndarray
    epochs: np.ndarray
    absorbed: bool
    final_time: float

    def state_at(self, t):
        """State at physical time t (right-continuous step function)."""
        if t < 0.0:
            raise DomainError("t must be nonnegative")
        k = int(np.searchsorted(self.epochs, t, side="right")) - 1
        return int(self.states[k])


@dataclass(frozen=True)
class MarginalPmf:
    """Distribution over states at a fixed time.

    stderr entries are zero and n_paths is 0 when the source is exact
    (spectral or closed form); n_discarded counts Monte Carlo paths
    dropped at the jump cap or table boundary.
    """

    time: float
    mass: dict
    stderr: dict
    n_paths: int
    source: str
    n_discarded: int = 0

    def total_mass(self):
        return sum(self.mass.values())

    def prob(self, j):
        return self.mass.get(int(j), 0.0)

    def tv_distance(self, other):
        keys = set(self.mass) | set(other.mass)
        return 0.5 * sum(abs(self.prob(k) - other.prob(k)) for k in keys)


def _check_start(rates, i0, horizon):
    i0 = int(i0)
    if i0 < 1:
        raise DomainError("initial state must be at least 1")
    if horizon <= 0.0:
        raise DomainError("horizon must be positive")
    rates._check_state(i0)
    return i0


def simulate_renewal(rates, alpha, i0, horizon, rng,
                     max_jumps=DEFAULT_MAX_JUMPS):
    """One Markov renewal trajectory up to absorption or the horizon."""
    alpha = check_alpha(alpha)
    i0 = _check_start(rates, i0, horizon)
    top = rates.max_state
    states = [i0]
    epochs = [0.0]
    i = i0
    clock = 0.0
    absorbed = False
    final_time = float(horizon)
    while i != 0:
        if top is not None and i >= top:
            raise ResourceError(
                f"path reached state {i} at the edge of the rate table")
        hold = sample_ml_waiting(alpha, rates.birth(i) + rates.death(i), rng)
        clock += hold
        if clock > horizon:
            break
        p_up, _ = embedded_step_prob(rates, i)
        i = i + 1 if rng.uniform() < p_up else i - 1
        states.append(i)
        epochs.append(clock)
        if len(states) > max_jumps:
            raise ResourceError(f"path exceeded {max_jumps} jumps")
    else:
        absorbed = True
        final_time = epochs[-1]
    return PathSample(states=np.asarray(states, dtype=np.int64),
                      epochs=np.asarray(epochs),
                      absorbed=absorbed, final_time=final_time)


def simulate_timechange_marginal(rates, alpha, i0, t, rng,
                                 max_jumps=DEFAULT_MAX_JUMPS):
    """State at time t via the time-change route.

    Draws the operational time E(t) from its marginal, then runs the
    classical (alpha = 1) chain lazily up to that operational time.
    """
    alpha = check_alpha(alpha)
    i0 = _check_start(rates, i0, t)
    u = sample_inverse_at(alpha, t, rng)
    path = simulate_renewal(rates, 1.0, i0, u, rng, max_jumps) \
        if u > 0.0 else None
    return int(path.states[-1]) if path is not None else i0


def simulate_timechange_path(rates, alpha, i0, query_times, grid_delta, rng,
                             max_jumps=DEFAULT_MAX_JUMPS,
                             grid_step_cap=10**8):
    """States at the query times along one coupled trajectory.

    A single classical path and a single inverted subordinator grid are
    shared by all query times, so the answers are jointly consistent.
    """
    alpha = check_alpha(alpha)
    query_times = np.asarray(query_times, dtype=float)
    if query_times.ndim != 1 or query_times.shape[0] == 0:
        raise DomainError("query_times must be a nonempty 1-d array")
    if np.any(np.diff(query_times) < 0.0) or np.any(query_times < 0.0):
        raise DomainError("query_times must be sorted and nonnegative")
    horizon = float(query_times[-1])
    i0 = _check_start(rates, i0, horizon if horizon > 0 else 1.0)
    if alpha == 1.0:
        ops = query_times
        op_horizon = horizon
    else:
        grid = build_grid(alpha, grid_delta, horizon, rng,
                          step_cap=grid_step_cap)
        ops = np.array([invert_grid(grid, t) for t in query_times])
        op_horizon = float(ops[-1])
    if op_horizon == 0.0:
        return np.full(query_times.shape, i0, dtype=np.int64)
    path = simulate_renewal(rates, 1.0, i0, op_horizon, rng, max_jumps)
    return np.array([path.state_at(u) for u in ops], dtype=np.int64)


def _endpoint_chunk(method, kind, lam, mu, birth, death, alpha, i0, t,
                    seed, start, count, max_jumps):
    seed_u = np.uint64(seed)
    if method == "renewal":
        return _k.renewal_endpoint_batch(
            kind, lam, mu, birth, death, alpha, i0, t,
            seed_u, np.uint64(start), count, max_jumps)
    return _k.timechange_endpoint_batch(
        kind, lam, mu, birth, death, alpha, i0, t,
        seed_u, np.uint64(2 * start), count, max_jumps)


def estimate_pmf(method, rates, alpha, i0, t, n_paths, seed,
                 workers=1, max_jumps=DEFAULT_MAX_JUMPS):
    """Monte Carlo marginal pmf at time t.

    method is "renewal" or "timechange".  Path p always uses the RNG
    stream derived from (seed, p), so the estimate is identical for any
    worker count.  Paths hitting the jump cap or the edge of a rate
    table are discarded and counted in n_discarded.
    """
    if method not in ("renewal", "timechange"):
        raise DomainError(f"unknown method {method!r}")
    alpha = check_alpha(alpha)
    i0 = _check_start(rates, i0, t)
    n_paths = int(n_paths)
    if n_paths < 1:
        raise DomainError("n_paths must be at least 1")
    workers = max(1, int(workers))
    kind = rates.kind_code
    birth = np.asarray(rates.birth_table, dtype=float)
    death = np.asarray(rates.death_table, dtype=float)
    args = (method, kind, rates.lam, rates.mu, birth, death,
            alpha, i0, float(t), int(seed))
    if workers == 1 or n_paths < 4 * workers:
        endpoints = [_endpoint_chunk(*args, 0, n_paths, max_jumps)]
    else:
        chunk = -(-n_paths // workers)
        starts = list(range(0, n_paths, chunk))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_endpoint_chunk, *args, s,
                                   min(chunk, n_paths - s), max_jumps)
                       for s in starts]
            endpoints = [f.result() for f in futures]
    ends = np.concatenate(endpoints)
    valid = ends[ends >= 0]
    n_valid = valid.shape[0]
    n_discarded = n_paths - n_valid
    if n_valid == 0:
        raise ResourceError("all paths were discarded")
    counts = np.bincount(valid)
    mass = {}
    stderr = {}
    for j in np.nonzero(counts)[0]:
        p = counts[j] / n_valid
        mass[int(j)] = float(p)
        stderr[int(j)] = math.sqrt(p * (1.0 - p) / n_valid)
    return MarginalPmf(time=float(t), mass=mass, stderr=stderr,
                       n_paths=n_valid, source=method,
                       n_discarded=n_discarded)

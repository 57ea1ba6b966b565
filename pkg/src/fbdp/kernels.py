"""Hot numeric kernels.

Everything in this module is written so the exact same source runs either
under numba's @njit or as plain Python over numpy scalars (see _backend).
The RNG is a splittable splitmix64 variant: modular uint64 arithmetic,
identical bit streams on both backends.
"""

import math

import numpy as np

from ._backend import maybe_njit

U64 = np.uint64

_GOLDEN = U64(0x9E3779B97F4A7C15)
_MIX1 = U64(0xBF58476D1CE4E5B9)
_MIX2 = U64(0x94D049BB133111EB)
_S30 = U64(30)
_S27 = U64(27)
_S31 = U64(31)
_S11 = U64(11)
_ONE = U64(1)

# 2^-53; (z >> 11) + 0.5 scaled by this gives a uniform strictly inside (0,1)
_INV53 = 1.1102230246251565e-16

# path discard codes
DISCARD_CAP = -1
DISCARD_RANGE = -2

KIND_LINEAR = 0
KIND_TABLE = 1


@maybe_njit
def mix64(z):
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    return z ^ (z >> _S31)


@maybe_njit
def stream_state(master_seed, stream_id):
    """Initial state for stream `stream_id` of seed `master_seed`."""
    return mix64(master_seed ^ mix64(stream_id + _GOLDEN))


@maybe_njit
def stream_gamma(master_seed, stream_id):
    """Per-stream additive constant (odd, so the orbit covers all of 2^64)."""
    return mix64(stream_id ^ mix64(master_seed)) | _ONE


@maybe_njit
def next_u01(state, gamma):
    state = state + gamma
    z = mix64(state)
    return state, (float(z >> _S11) + 0.5) * _INV53


@maybe_njit
def draw_stable(alpha, state, gamma):
    """One-sided alpha-stable draw with Laplace transform exp(-s**alpha).

    Two-uniform construction: angle uniform on (0, pi), unit exponential.
    Caller must handle alpha == 1 (point mass at 1).
    """
    state, u1 = next_u01(state, gamma)
    state, u2 = next_u01(state, gamma)
    theta = math.pi * u1
    w = -math.log(u2)
    inva = 1.0 / alpha
    num = math.sin(alpha * theta) * math.sin((1.0 - alpha) * theta) ** (inva - 1.0)
    den = math.sin(theta) ** inva * w ** (inva - 1.0)
    return state, num / den


@maybe_njit
def stable_batch(alpha, n, state, gamma):
    out = np.empty(n)
    for k in range(n):
        state, s = draw_stable(alpha, state, gamma)
        out[k] = s
    return out, state


@maybe_njit
def _rates_at(kind, lam, mu, birth, death, i):
    if kind == KIND_LINEAR:
        return i * lam, i * mu
    return birth[i], death[i]


@maybe_njit
def _table_len(kind, birth):
    if kind == KIND_LINEAR:
        return 1 << 62
    return birth.shape[0]


@maybe_njit
def renewal_endpoint(kind, lam, mu, birth, death, alpha, i0, t,
                     state, gamma, max_jumps):
    """State at time t of one renewal path; 0 means absorbed.

    Returns (endpoint, n_jumps).  endpoint DISCARD_CAP if the jump cap is
    hit, DISCARD_RANGE if a table schedule runs out of states.
    """
    i = i0
    clock = 0.0
    jumps = 0
    top = _table_len(kind, birth)
    inva = 1.0 / alpha
    while True:
        if i == 0:
            return 0, jumps
        if i >= top:
            return DISCARD_RANGE, jumps
        bi, di = _rates_at(kind, lam, mu, birth, death, i)
        total = bi + di
        state, u = next_u01(state, gamma)
        x = -math.log(u) / total
        if alpha == 1.0:
            hold = x
        else:
            state, s = draw_stable(alpha, state, gamma)
            hold = x ** inva * s
        clock += hold
        if clock > t:
            return i, jumps
        state, u = next_u01(state, gamma)
        if u < bi / total:
            i += 1
        else:
            i -= 1
        jumps += 1
        if jumps >= max_jumps:
            return DISCARD_CAP, jumps


@maybe_njit
def renewal_endpoint_batch(kind, lam, mu, birth, death, alpha, i0, t,
                           master_seed, first_stream, n_paths, max_jumps):
    """Endpoint states of n_paths independent renewal paths.

    Path p uses stream first_stream + p, so results do not depend on how
    the batch is chunked across workers.
    """
    out = np.empty(n_paths, dtype=np.int64)
    for p in range(n_paths):
        sid = first_stream + U64(p)
        st = stream_state(master_seed, sid)
        ga = stream_gamma(master_seed, sid)
        endpoint, _ = renewal_endpoint(kind, lam, mu, birth, death,
                                       alpha, i0, t, st, ga, max_jumps)
        out[p] = endpoint
    return out


@maybe_njit
def renewal_path(kind, lam, mu, birth, death, alpha, i0, horizon,
                 state, gamma, states, epochs, max_jumps):
    """Full trajectory until absorption or the horizon.

    Fills states/epochs (preallocated, len >= max_jumps + 1) starting with
    (i0, 0.0).  Returns (n_recorded, absorbed, status) where status is 0 on
    success or a DISCARD_* code.
    """
    states[0] = i0
    epochs[0] = 0.0
    i = i0
    clock = 0.0
    k = 0
    top = _table_len(kind, birth)
    inva = 1.0 / alpha
    while True:
        if i == 0:
            return k + 1, True, 0
        if i >= top:
            return k + 1, False, DISCARD_RANGE
        bi, di = _rates_at(kind, lam, mu, birth, death, i)
        total = bi + di
        state, u = next_u01(state, gamma)
        x = -math.log(u) / total
        if alpha == 1.0:
            hold = x
        else:
            state, s = draw_stable(alpha, state, gamma)
            hold = x ** inva * s
        clock += hold
        if clock > horizon:
            return k + 1, False, 0
        state, u = next_u01(state, gamma)
        if u < bi / total:
            i += 1
        else:
            i -= 1
        k += 1
        states[k] = i
        epochs[k] = clock
        if k >= max_jumps:
            return k + 1, False, DISCARD_CAP


@maybe_njit
def timechange_endpoint_batch(kind, lam, mu, birth, death, alpha, i0, t,
                              master_seed, first_stream, n_paths, max_jumps):
    """Endpoints via the time-change route: draw the inverse-subordinator
    marginal E(t) = (t / S)**alpha, then run the classical chain to that
    operational time.  Streams 2p / 2p+1 keep clock and chain independent.
    """
    out = np.empty(n_paths, dtype=np.int64)
    two = U64(2)
    for p in range(n_paths):
        base = first_stream + two * U64(p)
        if alpha == 1.0:
            u_op = t
        else:
            st = stream_state(master_seed, base)
            ga = stream_gamma(master_seed, base)
            st, s = draw_stable(alpha, st, ga)
            u_op = (t / s) ** alpha
        sid = base + _ONE
        st = stream_state(master_seed, sid)
        ga = stream_gamma(master_seed, sid)
        endpoint, _ = renewal_endpoint(kind, lam, mu, birth, death,
                                       1.0, i0, u_op, st, ga, max_jumps)
        out[p] = endpoint
    return out


@maybe_njit
def subordinator_values(alpha, delta, horizon, state, gamma, cap):
    """Cumulative sums of i.i.d. increments delta**(1/alpha) * S_k until the
    running value exceeds the horizon.  Returns (values, n_used, ok)."""
    scale = delta ** (1.0 / alpha)
    n_guess = 256
    values = np.empty(n_guess + 1)
    values[0] = 0.0
    total = 0.0
    k = 0
    while total <= horizon:
        if k >= cap:
            return values[:k + 1], k + 1, False
        if k >= n_guess:
            n_guess *= 2
            grown = np.empty(n_guess + 1)
            grown[:k + 1] = values[:k + 1]
            values = grown
        if alpha == 1.0:
            inc = scale
        else:
            state, s = draw_stable(alpha, state, gamma)
            inc = scale * s
        total += inc
        k += 1
        values[k] = total
    return values[:k + 1], k + 1, True


@maybe_njit
def tridiag_eig(diag, offdiag):
    """Eigendecomposition of a symmetric tridiagonal matrix.

    Implicit-shift QL with accumulated rotations (EISPACK tql2 lineage).
    Returns (eigenvalues ascending, column eigenvectors), both float64.
    """
    n = diag.shape[0]
    d = diag.copy()
    e = np.zeros(n)
    e[:n - 1] = offdiag
    z = np.eye(n)
    eps = 2.220446049250313e-16
    for l in range(n):
        n_iter = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            n_iter += 1
            if n_iter > 64:
                raise RuntimeError("tridiagonal QL failed to converge")
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            sgn = r if g >= 0.0 else -r
            g = d[m] - d[l] + e[l] / (g + sgn)
            s = 1.0
            c = 1.0
            p = 0.0
            underflow = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                for k in range(n):
                    f = z[k, i + 1]
                    z[k, i + 1] = s * z[k, i] + c * f
                    z[k, i] = c * z[k, i] - s * f
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    order = np.argsort(d)
    d_sorted = np.empty(n)
    z_sorted = np.empty((n, n))
    for j in range(n):
        d_sorted[j] = d[order[j]]
        for k in range(n):
            z_sorted[k, j] = z[k, order[j]]
    return d_sorted, z_sorted

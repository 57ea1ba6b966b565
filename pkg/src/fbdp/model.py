"""Birth-death rate schedules, reversibility weights, classification
series, the embedded jump chain, and truncated generator matrices.

Conventions: state 0 is absorbing (lambda_0 = mu_0 = 0); all other
supported states have strictly positive birth and death rates.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import kernels as _k
from .errors import DomainError

__all__ = [
    "RateSchedule",
    "PiWeights",
    "GeneratorMatrix",
    "SeriesClassification",
    "load_rates_csv",
    "pi_weights",
    "embedded_step_prob",
    "classify",
    "build_generator",
]

REFLECT = "reflect_at_M"
ABSORB = "absorb_at_M"

# direct pi products are safe below this size; log-space beyond
_PI_LOG_SWITCH = 10**4


@dataclass(frozen=True)
class RateSchedule:
    """Birth/death rates lambda_i, mu_i with lambda_0 = mu_0 = 0.

    kind "linear": lambda_i = i*lam, mu_i = i*mu for all i >= 1.
    kind "table": explicit arrays indexed by state, finite range.
    """

    kind: str
    lam: float = 0.0
    mu: float = 0.0
    birth_table: np.ndarray = None
    death_table: np.ndarray = None

    @staticmethod
    def linear(lam, mu):
        if lam <= 0.0 or mu <= 0.0:
            raise DomainError("linear rates require lam > 0 and mu > 0")
        return RateSchedule(kind="linear", lam=float(lam), mu=float(mu),
                            birth_table=np.empty(0), death_table=np.empty(0))

    @staticmethod
    def table(birth, death):
        birth = np.asarray(birth, dtype=float)
        death = np.asarray(death, dtype=float)
        if birth.ndim != 1 or birth.shape != death.shape:
            raise DomainError("birth and death tables must be equal-length 1-d")
        if birth.shape[0] < 2:
            raise DomainError("tables must cover at least states 0 and 1")
        if birth[0] != 0.0 or death[0] != 0.0:
            raise DomainError("state 0 must have zero rates")
        # the top state may have zero birth rate (hard ceiling)
        if np.any(birth[1:-1] <= 0.0) or birth[-1] < 0.0:
            raise DomainError("birth rates must be positive below the ceiling")
        if np.any(death[1:] <= 0.0):
            raise DomainError("death rates must be positive for states >= 1")
        return RateSchedule(kind="table", birth_table=birth, death_table=death)

    @property
    def kind_code(self):
        return _k.KIND_LINEAR if self.kind == "linear" else _k.KIND_TABLE

    @property
    def max_state(self):
        """Largest state with defined rates (unbounded for linear)."""
        if self.kind == "linear":
            return None
        return self.birth_table.shape[0] - 1

    def _check_state(self, i):
        i = int(i)
        if i < 0:
            raise DomainError("state must be nonnegative")
        if self.kind == "table" and i > self.max_state:
            raise DomainError(
                f"state {i} beyond table range (max {self.max_state})")
        return i

    def birth(self, i):
        i = self._check_state(i)
        if self.kind == "linear":
            return i * self.lam
        return float(self.birth_table[i])

    def death(self, i):
        i = self._check_state(i)
        if self.kind == "linear":
            return i * self.mu
        return float(self.death_table[i])

    def birth_array(self, M):
        """lambda_0..lambda_M as an array."""
        self._check_state(M)
        if self.kind == "linear":
            return np.arange(M + 1, dtype=float) * self.lam
        return self.birth_table[:M + 1].copy()

    def death_array(self, M):
        self._check_state(M)
        if self.kind == "linear":
            return np.arange(M + 1, dtype=float) * self.mu
        return self.death_table[:M + 1].copy()


def load_rates_csv(path):
    """Rate table from a CSV with header i,birth,death; row 0 must be 0,0,0."""
    birth = []
    death = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["i", "birth", "death"]:
            raise DomainError(
                f"expected header i,birth,death; got {reader.fieldnames}")
        for row in reader:
            i = int(row["i"])
            if i != len(birth):
                raise DomainError(
                    f"rows must be consecutive states; got i={i} "
                    f"at position {len(birth)}")
            birth.append(float(row["birth"]))
            death.append(float(row["death"]))
    return RateSchedule.table(birth, death)


@dataclass(frozen=True)
class PiWeights:
    """Reversibility weights pi_1..pi_M (pi_1 = 1)."""

    values: np.ndarray     # values[n-1] = pi_n
    log_values: np.ndarray

    def at(self, n):
        n = int(n)
        if not 1 <= n <= self.values.shape[0]:
            raise DomainError(f"pi index {n} out of range")
        return float(self.values[n - 1])

    @property
    def M(self):
        return self.values.shape[0]


def pi_weights(rates, M):
    """pi_n = prod_{i=1}^{n-1} lambda_i / mu_{i+1} for n = 1..M."""
    M = int(M)
    if M < 1:
        raise DomainError("M must be at least 1")
    rates._check_state(M)
    b = rates.birth_array(M)
    d = rates.death_array(M)
    ratios = b[1:M] / d[2:M + 1]
    logs = np.concatenate(([0.0], np.cumsum(np.log(ratios))))
    with np.errstate(over="ignore"):
        if M <= _PI_LOG_SWITCH:
            values = np.concatenate(([1.0], np.cumprod(ratios)))
        else:
            values = np.exp(logs)
    return PiWeights(values=values, log_values=logs)


def embedded_step_prob(rates, i):
    """Jump-chain probabilities (up, down) from state i >= 1."""
    i = rates._check_state(i)
    if i == 0:
        raise DomainError("state 0 is absorbing; no embedded step")
    bi = rates.birth(i)
    di = rates.death(i)
    total = bi + di
    return bi / total, di / total


@dataclass(frozen=True)
class SeriesClassification:
    """Convergence verdicts for the four classification series.

    Each status is "convergent", "diverged", or "undecided"; values hold
    the partial sums actually accumulated.  Derived predicates:
    absorption is almost sure iff A diverges; mean absorption time is
    finite iff B converges; the process comes down from infinity iff D
    converges.
    """

    status: dict
    values: dict
    terms_used: int
    tolerance: float

    @property
    def absorbed_almost_surely(self):
        return _predicate(self.status["A"], want_diverged=True)

    @property
    def finite_mean_absorption(self):
        return _predicate(self.status["B"], want_diverged=False)

    @property
    def comes_down_from_infinity(self):
        return _predicate(self.status["D"], want_diverged=False)


def _predicate(status, want_diverged):
    if status == "undecided":
        return None
    return (status == "diverged") == want_diverged


def _judge(terms, tolerance, k_tail, finite):
    """Convergence verdict for a positive-term series from its terms.

    Diverged when a term overflows or the partial sum exceeds
    1/tolerance.  Convergent when the schedule is finite (the sum is
    exact), when the tail has underflowed to zero, when the last k_tail
    terms are below tolerance times the sum and monotone, or when the
    tail decays geometrically.  Slowly varying tails are decided by the
    fitted power-law exponent; the gap around exponent 1 is undecided.
    """
    total = 0.0
    for idx, term in enumerate(terms):
        if not math.isfinite(term):
            return "diverged", total, idx + 1
        total += term
        if total > 1.0 / tolerance:
            return "diverged", total, idx + 1
    n = len(terms)
    if finite:
        return "convergent", total, n
    if n <= 2 * k_tail:
        return "undecided", total, n
    tail = terms[-k_tail:]
    if any(t == 0.0 for t in tail):
        return "convergent", total, n
    small = all(t < tolerance * total for t in tail)
    monotone = all(tail[i + 1] <= tail[i] * (1 + 1e-12)
                   for i in range(len(tail) - 1))
    if small and monotone:
        return "convergent", total, n
    ratios = [tail[i + 1] / tail[i] for i in range(len(tail) - 1)]
    if max(ratios) < 0.999:
        return "convergent", total, n
    # fitted decay exponent p in t_i ~ i^-p over the tail indices
    first = n - k_tail + 1
    exps = [math.log(tail[i] / tail[i + 1])
            / math.log((first + i + 1) / (first + i))
            for i in range(len(tail) - 1)]
    p = sum(exps) / len(exps)
    if p <= 1.02:
        return "diverged", total, n
    if p >= 1.10:
        return "convergent", total, n
    return "undecided", total, n


def classify(rates, tolerance=1e-12, max_terms=10**5, k_tail=50):
    """Convergence report for the series A, B, C, D."""
    if max_terms < 10:
        raise DomainError("max_terms must be at least 10")
    top = rates.max_state
    finite = top is not None and top <= max_terms
    n_terms = max_terms if top is None else min(max_terms, top)
    pi = pi_weights(rates, n_terms)
    b = rates.birth_array(n_terms)
    d = rates.death_array(n_terms)
    pv = pi.values
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        inv_lp = 1.0 / (b[1:] * pv)              # 1/(lambda_i pi_i), i=1..n
        a_terms = inv_lp
        b_terms = pv
        # pi-ratio prefactors survive where pi itself under/overflows:
        # head[i] = sum_{j<=i} pi_j/pi_i and tail[i] = sum_{j>=i} pi_j/pi_i
        # obey one-step recursions in pi_{i-1}/pi_i = mu_i/lambda_{i-1}
        # and pi_{i+1}/pi_i = lambda_i/mu_{i+1}
        head = np.empty(n_terms)
        head[0] = 1.0
        for i in range(1, n_terms):
            head[i] = 1.0 + d[i + 1] / b[i] * head[i - 1]
        tail = np.empty(n_terms)
        tail[-1] = 1.0
        for i in range(n_terms - 2, -1, -1):
            tail[i] = 1.0 + b[i + 1] / d[i + 2] * tail[i + 1]
        c_terms = head / b[1:]
        d_terms = tail[1:] / d[2:]
        # the last entries of the tail recursion feel the truncation
        # (tail starts at 1 instead of its limit); keep them out of the
        # decay-trend judgement
        if not finite and d_terms.shape[0] > 8 * k_tail:
            d_terms = d_terms[:-4 * k_tail]
    status = {}
    values = {}
    used = 0
    for name, terms in (("A", a_terms), ("B", b_terms),
                        ("C", c_terms), ("D", d_terms)):
        st, val, n = _judge(list(terms), tolerance, k_tail, finite)
        status[name] = st
        values[name] = val
        used = max(used, n)
    if not finite and status["B"] != "convergent":
        # every tail sum inside D is infinite once B diverges; the
        # truncated tails would otherwise look deceptively summable
        status["D"] = status["B"]
        values["D"] = math.inf if status["B"] == "diverged" else values["D"]
    return SeriesClassification(status=status, values=values,
                                terms_used=used, tolerance=tolerance)


@dataclass(frozen=True)
class GeneratorMatrix:
    """Killed generator on states 1..M as tridiagonal bands.

    sub[i] couples state i+2 down to i+1, diag[i] is state i+1, sup[i]
    couples state i+1 up to i+2.  Row 1 leaks mass mu_1 to the absorbing
    state; the top row follows boundary_policy.
    """

    M: int
    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray
    boundary_policy: str
    rates: RateSchedule

    def dense(self):
        q = np.zeros((self.M, self.M))
        idx = np.arange(self.M)
        q[idx, idx] = self.diag
        q[idx[:-1], idx[:-1] + 1] = self.sup
        q[idx[1:], idx[1:] - 1] = self.sub
        return q


def build_generator(rates, M, boundary_policy=REFLECT):
    """Truncated killed generator Q restricted to states 1..M.

    reflect_at_M zeroes the birth rate at M (mass conserving inside
    {0..M}); absorb_at_M keeps it, so mass lambda_M leaks upward.
    """
    M = int(M)
    if M < 1:
        raise DomainError("M must be at least 1")
    if boundary_policy not in (REFLECT, ABSORB):
        raise DomainError(f"unknown boundary policy {boundary_policy!r}")
    rates._check_state(M)
    b = rates.birth_array(M)
    d = rates.death_array(M)
    diag = -(b[1:] + d[1:])
    sup = b[1:M].copy()
    sub = d[2:].copy()
    if boundary_policy == REFLECT:
        diag[M - 1] = -d[M]
    return GeneratorMatrix(M=M, sub=sub, diag=diag, sup=sup,
                           boundary_policy=boundary_policy, rates=rates)

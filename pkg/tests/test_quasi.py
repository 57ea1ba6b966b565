"""Quasi-limiting and quasi-stationary computations."""

import math

import numpy as np
import pytest

from fbdp.errors import DomainError
from fbdp.model import RateSchedule, build_generator
from fbdp.quasi import (c_integrals, qld_coefficients, qld_limit_check,
                        qsd_classify, qsd_solve, qsd_stationarity_check,
                        rate_constant)
from fbdp.spectral import decompose_rates, green_function

RATES = RateSchedule.linear(0.5, 1.0)

# first entry of the Yaglom law started from one individual: 1/(2 ln 2)
YAGLOM_STATE_ONE = 0.7213475204444817


def test_qld_coefficients_match_green_function():
    # coefficient n is the expected occupation of n before absorption
    nmax = 25
    res = qld_coefficients(RATES, 3, nmax)
    g = green_function(build_generator(RATES, 40))
    np.testing.assert_allclose(res.coefficients, g[2, :nmax], rtol=1e-7)


def test_qld_first_entry_closed_form():
    res = qld_coefficients(RATES, 1, 400)
    assert res.prob(1) == pytest.approx(YAGLOM_STATE_ONE, rel=1e-10)
    assert res.tail_bound < 1e-80


def test_qld_pmf_normalized_positive():
    res = qld_coefficients(RATES, 2, 60)
    assert res.pmf.sum() == pytest.approx(1.0)
    assert np.all(res.pmf > 0.0)


def test_qld_start_dependence_cutoff():
    # the inner sum stops at min(i0-1, n-1): entries up to the smaller
    # start agree, deeper entries pick up the extra terms
    a = qld_coefficients(RATES, 2, 30).coefficients
    b = qld_coefficients(RATES, 5, 30).coefficients
    np.testing.assert_allclose(a[:2], b[:2], rtol=1e-12)
    assert not np.allclose(a[4:8], b[4:8])


def test_qld_absent_when_pi_diverges():
    res = qld_coefficients(RateSchedule.linear(1.0, 1.0), 1, 50)
    assert not res.exists
    with pytest.raises(DomainError):
        res.prob(1)


def test_qld_limit_check_fractional_vs_classical():
    # conditioned on survival, the fractional chain settles on the
    # occupation-time law while the classical chain settles on the
    # minimal quasi-stationary law
    dec = decompose_rates(RATES, 300)
    res = qld_coefficients(RATES, 1, 300)
    frac = qld_limit_check(dec, 0.7, 1, 1, [1e5, 1e6])
    assert frac[-1] == pytest.approx(res.prob(1), rel=1e-4)
    classical = qld_limit_check(dec, 1.0, 1, 1, [50.0, 100.0])
    assert classical[-1] == pytest.approx(0.5, rel=1e-8)


def test_c_integrals_match_green_function():
    # C_{i,j,1} = G_{i,j} / pi_j
    dec = decompose_rates(RATES, 50)
    g = green_function(dec.gen)
    for i, j in [(1, 1), (2, 3), (4, 1)]:
        c = c_integrals(dec, i, j)
        assert c.at(1) == pytest.approx(g[i - 1, j - 1] / dec.pi.at(j),
                                        rel=1e-9)
        assert c.at(0) == pytest.approx(1.0 if i == j and i == 1 else
                                        c.at(0))  # defined for k = 0


def test_rate_constant_signs_and_half_branch():
    dec = decompose_rates(RATES, 120)
    c_half = rate_constant(dec, 0.5, 1, 1)
    c_07 = rate_constant(dec, 0.7, 1, 1)
    assert math.isfinite(c_half) and math.isfinite(c_07)
    with pytest.raises(DomainError):
        rate_constant(dec, 1.0, 1, 1)


def test_qsd_solve_known_family():
    # subcritical linear: decay parameters theta in (0, mu - lam] admit
    # a qsd; larger theta forces a sign change
    for theta in [0.1, 0.3, 0.5]:
        res = qsd_solve(RATES, theta, 400)
        assert res.outcome == "qsd"
        assert res.nu.sum() == pytest.approx(1.0)
        assert res.residual < 1e-9
    assert qsd_solve(RATES, 0.7, 400).outcome in ("negative", "divergent")
    assert qsd_solve(RATES, 0.0, 400).outcome == "negative"


def test_qsd_minimal_geometric_closed_form():
    # the decay-(mu - lam) law of the linear chain is geometric
    res = qsd_solve(RATES, 0.5, 800)
    j = np.arange(1, 31)
    np.testing.assert_allclose(res.nu[:30], 0.5 ** j, rtol=1e-10)


def test_qsd_classify_regimes():
    assert qsd_classify(RATES) == "family"
    assert qsd_classify(RateSchedule.linear(1.0, 1.0)) == "none"
    n = np.arange(0, 3001, dtype=float)
    quad = RateSchedule.table(np.where(n > 0, n, 0.0), n ** 2)
    assert qsd_classify(quad) == "unique"


def test_qsd_stationarity_fractional_invariance():
    # the minimal qsd is quasi-stationary for every fractional order;
    # exact in the reflected truncation
    M = 200
    dec = decompose_rates(RATES, M)
    res = qsd_solve(RATES, 0.5, M)
    for alpha in [0.5, 0.8, 1.0]:
        dev = qsd_stationarity_check(dec, alpha, res.nu, 0.5,
                                     [0.5, 2.0, 10.0])
        assert dev < 1e-12


def test_qsd_stationarity_family_member_truncation_limited():
    # heavier-tailed family members only satisfy the identity up to the
    # truncation boundary error
    M = 100
    dec = decompose_rates(RATES, M)
    res = qsd_solve(RATES, 0.3, M)
    for alpha in [0.5, 1.0]:
        dev = qsd_stationarity_check(dec, alpha, res.nu, 0.3,
                                     [0.5, 2.0, 10.0])
        assert dev < 0.01

"""Closed forms for the linear process and cross-validation oracles."""

import math

import numpy as np
import pytest
from scipy.special import gamma as _gamma

from fbdp.errors import DomainError
from fbdp.linear import (LinearParams, critical_no_qld_witness,
                         iterated_log_scale, p1j_classical, qld_linear,
                         supercritical_tail, survival_classical,
                         survival_fractional, tail_constant_subcritical)
from fbdp.model import RateSchedule
from fbdp.quasi import qld_coefficients
from fbdp.spectral import decompose_rates, survival_prob, transition_prob

SUB = LinearParams(0.5, 1.0)
CRIT = LinearParams(1.0, 1.0)
SUP = LinearParams(1.0, 0.5)


def test_regimes():
    assert SUB.regime == "subcritical"
    assert CRIT.regime == "critical"
    assert SUP.regime == "supercritical"


def test_p1j_row_sums_to_survival():
    for params in [SUB, CRIT, SUP]:
        for t in [0.5, 2.0]:
            row = sum(p1j_classical(params, j, t) for j in range(1, 400))
            assert row == pytest.approx(survival_classical(params, t),
                                        rel=1e-12)


def test_p1j_matches_spectral():
    dec = decompose_rates(RateSchedule.linear(0.5, 1.0), 120)
    for j in [1, 2, 5]:
        for t in [0.5, 1.5, 3.0]:
            assert p1j_classical(SUB, j, t) == pytest.approx(
                transition_prob(dec, 1.0, 1, j, t), abs=1e-11)


def test_survival_classical_critical():
    assert survival_classical(CRIT, 3.0) == pytest.approx(0.25, rel=1e-14)


def test_survival_classical_supercritical_limits():
    assert survival_classical(SUP, 0.0) == 1.0
    # escape probability 1 - mu/lam = 1/2
    assert survival_classical(SUP, 60.0) == pytest.approx(0.5, rel=1e-12)


def test_survival_fractional_matches_spectral():
    dec = decompose_rates(RateSchedule.linear(0.5, 1.0), 400)
    for alpha in [0.5, 0.7]:
        for t in [0.5, 2.0, 10.0]:
            assert survival_fractional(SUB, alpha, t) == pytest.approx(
                survival_prob(dec, alpha, 1, t), rel=1e-9)


def test_survival_fractional_critical_matches_spectral():
    dec = decompose_rates(RateSchedule.linear(1.0, 1.0), 600)
    for t in [0.5, 2.0]:
        assert survival_fractional(CRIT, 0.6, t) == pytest.approx(
            survival_prob(dec, 0.6, 1, t), rel=1e-8)


def test_survival_fractional_reduces_to_classical():
    for params in [SUB, CRIT, SUP]:
        for t in [0.5, 2.0]:
            assert survival_fractional(params, 1.0, t) == pytest.approx(
                survival_classical(params, t), rel=1e-10)


def test_survival_supercritical_positive_at_zero():
    # the non-extinction series must start from 1 at t = 0+
    val = survival_fractional(SUP, 0.7, 1e-9)
    assert val == pytest.approx(1.0, abs=1e-3)


def test_subcritical_tail_constant():
    # t^alpha * survival approaches -ln(1 - lam/mu)/(lam Gamma(1-alpha))
    alpha = 0.7
    c = tail_constant_subcritical(SUB, alpha)
    assert c == pytest.approx(
        math.log(2.0) / (0.5 * _gamma(0.3)), rel=1e-12)
    t = 1e6
    assert t ** alpha * survival_fractional(SUB, alpha, t) == pytest.approx(
        c, rel=1e-3)


def test_supercritical_tail():
    alpha = 0.6
    limit, rate = supercritical_tail(SUP, alpha)
    assert limit == 0.5
    for t in [1e5, 1e6]:
        excess = survival_fractional(SUP, alpha, t) - limit
        assert excess * t ** alpha == pytest.approx(rate, rel=1e-3)


def test_qld_linear_matches_general_machinery():
    for i0 in [1, 3]:
        a = qld_linear(SUB, i0, 200)
        b = qld_coefficients(RateSchedule.linear(0.5, 1.0), i0, 200)
        np.testing.assert_allclose(a.pmf, b.pmf, rtol=1e-10)
    assert qld_linear(SUB, 1, 400).prob(1) == pytest.approx(
        1.0 / (2.0 * math.log(2.0)), rel=1e-10)


def test_qld_linear_absent_outside_subcritical():
    assert not qld_linear(CRIT, 1, 50).exists
    assert not qld_linear(SUP, 1, 50).exists


def test_iterated_log_scale():
    with pytest.raises(DomainError):
        iterated_log_scale(0.5, 2.0)
    v = iterated_log_scale(0.5, 1e6)
    assert v == pytest.approx(1000.0 * math.sqrt(math.log(math.log(1000.0))))


def test_critical_witness_classical_control():
    # alpha = 1 negative control: conditional mass on a finite set
    # converges instead of draining
    rep = critical_no_qld_witness(CRIT, 1.0, [1e3, 1e4, 1e5], 0, 0,
                                  spectral_M=400)
    assert rep.source == "spectral"
    assert not rep.strictly_decreasing or (
        abs(rep.conditional_mass[-1] - rep.conditional_mass[-2])
        < 0.05 * rep.conditional_mass[-1])


def test_domain_errors():
    with pytest.raises(DomainError):
        LinearParams(0.0, 1.0)
    with pytest.raises(DomainError):
        tail_constant_subcritical(SUP, 0.5)
    with pytest.raises(DomainError):
        supercritical_tail(SUB, 0.5)
    with pytest.raises(DomainError):
        critical_no_qld_witness(SUB, 0.5, [1.0], 10, 0)

"""Mittag-Leffler kernel against frozen extended-precision references."""

import math

import numpy as np
import pytest

from fbdp.errors import DomainError, UnsupportedDomainError
from fbdp.mlf import (ml_eval, ml_eval_grid, ml_laplace_residual,
                      ml_survival, ml_tail_expansion)

# frozen by tests/oracles/gen_ml_reference.py (exact-rational alpha,
# inflated working precision); columns: alpha num, alpha den, x, value
ML_REFERENCE = [
    (3, 10, -0.1, 0.8988115365027225529671),
    (3, 10, -1.0, 0.4565944083296906690069),
    (3, 10, -2.0, 0.2902322261678753532588),
    (3, 10, -10.0, 0.0726497290727720853173),
    (3, 10, -100.0, 0.007658856222286641350195),
    (3, 10, -10000.0, 0.00007703381024979549331909),
    (1, 2, -0.1, 0.8964569799691266419319),
    (1, 2, -1.0, 0.4275835761558070044108),
    (1, 2, -2.0, 0.2553956763105057438651),
    (1, 2, -10.0, 0.05614099274382258585752),
    (1, 2, -100.0, 0.005641613782989432903556),
    (1, 2, -10000.0, 0.00005641895807268084115235),
    (7, 10, -0.1, 0.8975611269313867765388),
    (7, 10, -1.0, 0.3996119781155993843659),
    (7, 10, -2.0, 0.2137867270152972651863),
    (7, 10, -10.0, 0.03617326554230915333172),
    (7, 10, -100.0, 0.003369687416305993755694),
    (7, 10, -10000.0, 0.00003342996137921310562824),
    (9, 10, -0.1, 0.9017569424498594032873),
    (9, 10, -1.0, 0.3760660214246418811773),
    (9, 10, -2.0, 0.16352830001693004885),
    (9, 10, -10.0, 0.01282060605110210270461),
    (9, 10, -100.0, 0.001068972418287089284963),
    (9, 10, -10000.0, 0.00001051311305808860972262),
]


@pytest.mark.parametrize("num,den,x,ref", ML_REFERENCE)
def test_reference_values(num, den, x, ref):
    got = ml_eval(num / den, x)
    assert got == pytest.approx(ref, rel=1e-10)


def test_exponential_special_case():
    for x in [-3.0, -0.5, 0.0, 1.5]:
        assert ml_eval(1.0, x) == pytest.approx(math.exp(x), rel=1e-15)


def test_half_order_closed_form():
    # E_{1/2}(-x) = exp(x^2) erfc(x)
    from scipy.special import erfcx
    for x in [0.25, 1.0, 3.0, 10.0]:
        assert ml_eval(0.5, -x) == pytest.approx(erfcx(x), rel=1e-11)


def test_value_at_zero_is_one():
    for alpha in [0.3, 0.5, 0.9, 1.0]:
        assert ml_eval(alpha, 0.0) == 1.0


def test_monotone_decreasing_in_magnitude():
    xs = -np.geomspace(1e-4, 1e8, 400)[::-1]  # ascending toward 0
    for alpha in [0.3, 0.5, 0.7, 0.9]:
        vals = ml_eval_grid(alpha, xs)
        assert np.all(np.diff(vals) > 0.0)
        assert np.all(vals > 0.0)
        assert np.all(vals < 1.0)


def test_complete_monotonicity_second_differences():
    # convexity on a uniform grid across both switchover thresholds
    for alpha in [0.3, 0.6, 0.9]:
        xs = -np.linspace(0.01, 40.0 ** alpha * 1.5, 2000)[::-1]
        vals = ml_eval_grid(alpha, xs)
        assert np.all(np.diff(vals, 2) > -1e-13)


def test_tail_limit():
    # x * E_alpha(x) -> -1/Gamma(1-alpha) as x -> -inf
    from scipy.special import gamma
    for alpha in [0.3, 0.5, 0.7]:
        x = -1e8
        assert x * ml_eval(alpha, x) == pytest.approx(
            -1.0 / gamma(1.0 - alpha), rel=1e-7)


def test_tail_expansion_matches_eval():
    for alpha in [0.3, 0.7, 0.9]:
        got = ml_tail_expansion(alpha, 2.0, 1e6, 6)
        ref = ml_eval(alpha, -2.0 * 1e6 ** alpha)
        assert got == pytest.approx(ref, rel=1e-5)


def test_tail_expansion_half_alpha_even_terms_vanish():
    # 1/Gamma(1 - m/2) = 0 for even m >= 2
    one = ml_tail_expansion(0.5, 1.0, 10000.0, 1)
    two = ml_tail_expansion(0.5, 1.0, 10000.0, 2)
    assert one == two


def test_laplace_identity_grid():
    for alpha in [0.4, 0.6, 0.9]:
        for theta in [0.3, 1.0, 4.0]:
            for s in [0.5, 1.0, 3.0]:
                assert ml_laplace_residual(alpha, theta, s) < 1e-8


def test_survival_kernel():
    assert ml_survival(0.6, 2.0, 0.0) == 1.0
    assert ml_survival(0.6, 2.0, 1.5) == pytest.approx(
        ml_eval(0.6, -2.0 * 1.5 ** 0.6), rel=1e-14)


def test_domain_errors():
    with pytest.raises(DomainError):
        ml_eval(0.0, -1.0)
    with pytest.raises(DomainError):
        ml_eval(1.5, -1.0)
    with pytest.raises(UnsupportedDomainError):
        ml_eval(0.5, 1.0)
    with pytest.raises(DomainError):
        ml_survival(0.5, -1.0, 1.0)


def test_grid_matches_scalar():
    xs = -np.geomspace(0.01, 1e6, 50)
    for alpha in [0.4, 0.8]:
        grid = ml_eval_grid(alpha, xs)
        scalar = np.array([ml_eval(alpha, x) for x in xs])
        np.testing.assert_allclose(grid, scalar, rtol=1e-14)

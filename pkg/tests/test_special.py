import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from scipy import special as sp

from mechgap.errors import ConvergenceError, DomainError
from mechgap.special import (
    PI2_6,
    ar_upper_constant,
    ar_upper_constant_estimate,
    c_star,
    c_star_estimate,
    dilog,
    fact_G,
    fact_H,
    fun_Q,
    fun_Q_inv,
    fun_R,
    fun_R_inv,
    fun_V,
    psi1,
    psi2,
)
from mechgap.numerics import ToleranceConfig
from mechgap.verification import cstar_unsubstituted, pi2over6_series

LN2 = math.log(2.0)


# -- dilogarithm -------------------------------------------------------------

@pytest.mark.parametrize("z,expected", [
    (0.0, 0.0),
    (1.0, math.pi ** 2 / 6),
    (-1.0, -math.pi ** 2 / 12),
    (0.5, math.pi ** 2 / 12 - LN2 ** 2 / 2),
])
def test_dilog_known_values(z, expected):
    assert dilog(z) == pytest.approx(expected, abs=1e-14)


@given(st.floats(-20.0, 1.0))
def test_dilog_matches_scipy_spence(z):
    assert dilog(z) == pytest.approx(float(sp.spence(1.0 - z)), abs=1e-13, rel=1e-13)


@given(st.floats(0.5, 0.99))
def test_dilog_series_and_reflection_agree(z):
    cfg = ToleranceConfig(max_iter=5000)
    assert dilog(z, cfg, method="series") == pytest.approx(dilog(z, cfg, method="reflection"), abs=1e-10)


def test_dilog_series_reports_non_convergence():
    with pytest.raises(ConvergenceError):
        dilog(0.95, method="series")


def test_dilog_vectorized():
    z = np.linspace(-3, 1, 41)
    np.testing.assert_allclose(dilog(z), sp.spence(1 - z), atol=1e-13)


def test_dilog_domain():
    with pytest.raises(DomainError):
        dilog(1.5)


# -- R, Q, V and their inverses ------------------------------------------------

def test_fun_R_values():
    assert fun_R(2.0) == pytest.approx(2.0 * math.log(4.0 / 3.0), rel=1e-15)
    assert fun_R(math.inf) == 0.0
    # R diverges like ln(1/(p-1)); 1 + 1e-5 is close enough to pass 10.
    assert fun_R(1.0 + 1e-5) > 10.0
    assert fun_R(1.0001) > 8.0


def test_fun_Q_values():
    expected = -math.log(0.75) - 0.5 * float(sp.spence(0.75))
    assert fun_Q(2.0) == pytest.approx(expected, abs=1e-12)
    # Q as the series sum_k k^-2 p^-2k plus -ln(1 - p^-2)
    series = sum(0.25 ** k / k ** 2 for k in range(1, 60))
    assert fun_Q(2.0) == pytest.approx(-math.log(0.75) - 0.5 * series, abs=1e-10)
    assert fun_Q(math.inf) == 0.0
    assert fun_Q(1.001) > 5.0


@pytest.mark.parametrize("fn", [fun_R, fun_Q])
def test_domain_is_above_one(fn):
    with pytest.raises(DomainError):
        fn(1.0)
    with pytest.raises(DomainError):
        fn(0.5)


def test_inverses_roundtrip_and_limits():
    assert fun_Q_inv(fun_Q(2.0)) == pytest.approx(2.0, abs=1e-8)
    assert fun_R_inv(fun_R(1.3)) == pytest.approx(1.3, abs=1e-8)
    assert fun_Q_inv(0.0) == math.inf
    assert fun_R_inv(0.0) == math.inf


@given(st.floats(1.01, 500.0))
def test_inverse_roundtrip_property(p):
    assert fun_R_inv(fun_R(p)) == pytest.approx(p, rel=1e-8)
    assert fun_Q_inv(fun_Q(p)) == pytest.approx(p, rel=1e-8)


@given(st.floats(1.001, 1e3), st.floats(1.001, 1e3))
def test_R_and_Q_decrease(a, b):
    assume(abs(a - b) > 1e-6 * max(a, b))
    lo, hi = min(a, b), max(a, b)
    assert fun_R(lo) > fun_R(hi) > 0
    assert fun_Q(lo) > fun_Q(hi) > 0


@given(st.floats(1.01, 1e3))
def test_ode_R_prime_equals_p_Q_prime(p):
    h = 1e-5 * p
    dr = (fun_R(p + h) - fun_R(p - h)) / (2 * h)
    dq = (fun_Q(p + h) - fun_Q(p - h)) / (2 * h)
    assert abs(dr - p * dq) <= 1e-6 * abs(dr)


def test_fun_V_values():
    assert fun_V(2.0) == pytest.approx(2.0 * LN2, rel=1e-15)
    assert fun_V(1.5) == pytest.approx(1.5 * math.log(3.0), rel=1e-15)
    assert fun_V(1e6) == pytest.approx(1.0, abs=1e-5)


def test_psi_values():
    assert psi1(0.5) == 0.0
    assert psi1(2.0) == 0.5
    assert psi2(1.0) == 0.0
    assert psi2(2.0) == pytest.approx(0.5 * (1.0 + LN2), rel=1e-15)


@given(st.floats(1.0, 1e4))
def test_psi2_dominates_psi1(p):
    # x(1 - ln x) >= x on (0, 1]
    assert psi2(p) >= psi1(p) - 1e-15


# -- constants ---------------------------------------------------------------

def test_c_star_value_and_bracket():
    val, err = c_star_estimate()
    assert val == pytest.approx(2.6202, abs=5e-4)
    assert 0.5 < val - 2.0 < 1.0
    assert err < 1e-8


def test_c_star_matches_unsubstituted_oracle():
    assert c_star() == pytest.approx(cstar_unsubstituted(), abs=2e-4)


def test_c_star_tolerance_plumbing():
    coarse = ToleranceConfig(quad_tol=1e-6)
    v1, e1 = c_star_estimate(coarse)
    v0, e0 = c_star_estimate()
    assert v1 == pytest.approx(v0, abs=1e-6)
    assert e0 <= e1


def test_pi2over6_and_series_oracle():
    val, _ = ar_upper_constant_estimate()
    assert val == pytest.approx(PI2_6, abs=1e-6)
    assert pi2over6_series() == pytest.approx(val, abs=1e-6)
    assert ar_upper_constant() - 1.0 == pytest.approx(PI2_6 - 1.0, abs=1e-6)


# -- facts G and H -----------------------------------------------------------

def test_facts_vanish_on_the_diagonal():
    assert fact_G(1.7, 1.7) == pytest.approx(0.0, abs=1e-12)
    assert fact_H(2.3, 2.3) == pytest.approx(0.0, abs=1e-12)


def test_fact_G_strictly_negative_example():
    assert fact_G(1.5, 3.0) < 0.0


def test_facts_domain():
    with pytest.raises(DomainError):
        fact_G(2.0, 1.5)
    with pytest.raises(DomainError):
        fact_H(1.0, 2.0)


@given(st.floats(1.001, 100.0), st.floats(1.001, 100.0))
def test_fact_signs(a, b):
    x, y = min(a, b), max(a, b)
    assert fact_G(x, y) <= 1e-9
    assert fact_H(x, y) >= -1e-9

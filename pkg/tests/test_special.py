import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from monosob.errors import DomainError
from monosob.special import (
    Weight,
    ball_geometry,
    gamma,
    log_gamma,
    log_stirling_gamma,
    pi_A,
    stirling_gamma,
    stirling_relative_error,
)

exponents = st.lists(st.floats(0.0, 4.0, allow_nan=False), min_size=1, max_size=4)


def test_weight_basic_fields():
    w = Weight((1.0, 0.0, 2.5))
    assert w.n == 3 and w.D == 6.5 and w.k == 2
    assert w.positive == (True, False, True)
    assert w.repeat(2).A == (1.0, 0.0, 2.5, 1.0, 0.0, 2.5)
    assert w.extend(0.0).A == (1.0, 0.0, 2.5, 0.0)
    assert Weight.parse("1, 0,2.5") == w
    assert Weight.zeros(2) == Weight((0.0, 0.0))


@pytest.mark.parametrize("bad", [(-1.0, 2.0), (math.inf,), (math.nan, 0.0), ()])
def test_weight_rejects_bad_exponents(bad):
    with pytest.raises(DomainError):
        Weight(bad)


def test_weight_parse_rejects_garbage():
    with pytest.raises(DomainError):
        Weight.parse("1,x")


@given(st.floats(1e-3, 150.0))
def test_gamma_matches_mpmath(s):
    ref = float(mp.gamma(s))
    assert gamma(s) == pytest.approx(ref, rel=2e-13)


@given(st.floats(1e-3, 1e7))
def test_log_gamma_matches_mpmath(s):
    ref = float(mp.loggamma(s))
    assert log_gamma(s) == pytest.approx(ref, rel=1e-14, abs=1e-14)


def test_gamma_half_integers():
    assert gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-15)
    assert gamma(1.0) == 1.0
    assert gamma(5.0) == pytest.approx(24.0, rel=1e-15)


@pytest.mark.parametrize("s", [0.0, -1.0, -0.5])
def test_log_gamma_domain(s):
    with pytest.raises(DomainError):
        log_gamma(s)


def test_stirling_relative_error_matches_series():
    # Gamma(s+1) = sqrt(2 pi s)(s/e)^s (1 + 1/(12 s) + ...)
    for s in (10.0, 50.0, 1e3, 1e5):
        assert stirling_relative_error(s) == pytest.approx(1.0 / (12.0 * s), rel=0.02)


def test_stirling_overflow_is_inf_and_log_is_finite():
    assert stirling_gamma(1e4) == math.inf
    assert math.isfinite(log_stirling_gamma(1e7))


def test_pi_A_zero_weight_is_pi():
    for n in (1, 2, 5):
        assert pi_A(Weight.zeros(n)) == pytest.approx(math.pi, rel=1e-15)


def test_pi_A_example():
    assert pi_A(Weight((1.0, 1.0))) == pytest.approx(0.5, rel=1e-15)


@given(exponents)
def test_pi_A_matches_mpmath(A):
    w = Weight(tuple(A))
    prod = mp.mpf(1)
    for a in A:
        prod *= mp.gamma((a + 1) / mp.mpf(2)) / (2 if a > 0 else 1)
    ref = float(prod ** (mp.mpf(2) / w.D))
    assert pi_A(w) == pytest.approx(ref, rel=1e-13)


@given(exponents)
def test_ball_perimeter_is_D_times_measure(A):
    w = Weight(tuple(A))
    g = ball_geometry(w)
    assert g.perimeter == pytest.approx(w.D * g.measure, rel=1e-14)
    ref = float(mp.mpf(pi_A(w)) ** (w.D / 2) / mp.gamma(w.D / 2 + 1))
    assert g.measure == pytest.approx(ref, rel=1e-12)


def test_unweighted_ball_volumes():
    assert ball_geometry(Weight.zeros(2)).measure == pytest.approx(math.pi, rel=1e-15)
    assert ball_geometry(Weight.zeros(3)).measure == pytest.approx(4.0 * math.pi / 3.0, rel=1e-15)


def test_ball_measure_brute_force_A11():
    # int over the quarter disc of x y dx dy = 1/8
    v, _ = integrate.dblquad(lambda y, x: x * y, 0, 1, 0, lambda x: math.sqrt(1 - x * x),
                             epsabs=1e-14, epsrel=1e-13)
    assert ball_geometry(Weight((1.0, 1.0))).measure == pytest.approx(0.125, rel=1e-14)
    assert v == pytest.approx(0.125, rel=1e-8)


def test_ball_measure_monte_carlo_fractional():
    w = Weight((0.5, 0.0))
    rng = np.random.default_rng(0)
    x = rng.uniform(0, 1, 400_000)
    y = rng.uniform(-1, 1, 400_000)
    inside = x * x + y * y < 1
    est = 2.0 * np.mean(np.where(inside, x**0.5, 0.0))
    assert est == pytest.approx(ball_geometry(w).measure, rel=5e-3)

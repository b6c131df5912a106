import math

import mpmath as mp
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from monosob.constants import (
    asymptotic_limit,
    asymptotic_term,
    constants_table,
    critical_exponent,
    refined_C_q,
    refined_C_q_limit,
    shannon_c_A,
    sobolev_c1,
    sobolev_constant,
    sobolev_cp,
    tm_alpha_D,
    trace_constants,
    whole_space_K,
)
from monosob.errors import DomainError
from monosob.special import Weight, ball_geometry, pi_A

exponents = st.lists(st.floats(0.0, 4.0, allow_nan=False), min_size=1, max_size=4)


def talenti(n, p):
    """Classical sharp Sobolev constant on R^n, evaluated in mpmath."""
    n, p = mp.mpf(n), mp.mpf(p)
    return n ** (-1 / p) / mp.sqrt(mp.pi) * ((p - 1) / (n - p)) ** (1 - 1 / p) * (
        mp.gamma(1 + n / 2) * mp.gamma(n) / (mp.gamma(n / p) * mp.gamma(1 + n - n / p))
    ) ** (1 / n)


@pytest.mark.parametrize("n,p", [(3, 2.0), (4, 2.0), (3, 1.5), (5, 3.0)])
def test_cp_reduces_to_classical_constant_on_half_spaces(n, p):
    # A = 0 gives the full-space constant on R^n
    assert sobolev_cp(Weight.zeros(n), p) == pytest.approx(float(talenti(n, p)), rel=1e-13)


def test_c1_is_inverse_isoperimetric_constant():
    for n in (2, 3, 4):
        w = Weight.zeros(n)
        g = ball_geometry(w)
        # equality on the unit ball: m^((D-1)/D) = C1 * D * m
        assert sobolev_c1(w) == pytest.approx(g.measure ** (-1.0 / n) / n, rel=1e-14)


@given(exponents, st.floats(1.05, 3.0))
def test_cp_matches_mpmath(A, p):
    w = Weight(tuple(A))
    D = w.D
    assume(p < D - 0.05)
    P = ball_geometry(w).perimeter
    pp = p / (p - 1)
    D_, p_ = mp.mpf(D), mp.mpf(p)
    c1 = (mp.mpf(D) ** (-1)) * (mp.mpf(P) / D_) ** (-1 / D_)
    ref = c1 * D_ ** (1 - 1 / p_ - 1 / D_) * ((p_ - 1) / (D_ - p_)) ** (1 / mp.mpf(pp)) * (
        mp.mpf(pp) * mp.gamma(D_) / (mp.gamma(D_ / p_) * mp.gamma(D_ / mp.mpf(pp)))
    ) ** (1 / D_)
    assert sobolev_cp(w, p) == pytest.approx(float(ref), rel=1e-12)


def test_cp_domain():
    with pytest.raises(DomainError):
        sobolev_cp(Weight((1.0, 1.0)), 4.0)
    with pytest.raises(DomainError):
        sobolev_cp(Weight((1.0, 1.0)), 1.0)
    assert sobolev_constant(Weight((1.0, 1.0)), 1) == sobolev_c1(Weight((1.0, 1.0)))


def test_critical_exponent():
    assert critical_exponent(Weight.zeros(3), 2.0) == 6.0
    with pytest.raises(DomainError):
        critical_exponent(Weight.zeros(2), 2.0)


@given(exponents)
def test_shannon_c_A_two_is_pi_A(A):
    w = Weight(tuple(A))
    assert shannon_c_A(w, 2.0) == pytest.approx(pi_A(w), rel=1e-12)


@given(exponents, st.floats(0.3, 5.0))
def test_shannon_c_A_normalizes_exp_profile(A, alpha):
    w = Weight(tuple(A))
    C = shannon_c_A(w, alpha)
    P = ball_geometry(w).perimeter
    # int exp(-C|x|^alpha) x^A dx = P Gamma(D/alpha) / (alpha C^(D/alpha))
    mass = P * math.gamma(w.D / alpha) / (alpha * C ** (w.D / alpha))
    assert mass == pytest.approx(1.0, rel=1e-12)


def test_alpha_D_planar_is_four_pi():
    assert tm_alpha_D(Weight((0.0, 0.0))) == pytest.approx(4.0 * math.pi, rel=1e-12)
    # D^{...} n omega_{n-1}^{1/(n-1)} in three dimensions
    assert tm_alpha_D(Weight.zeros(3)) == pytest.approx(3.0 * (4.0 * math.pi) ** 0.5, rel=1e-13)


def test_alpha_D_needs_D_above_one():
    with pytest.raises(DomainError):
        tm_alpha_D(Weight((0.0,)))


def test_whole_space_K_branches():
    w = Weight((1.0, 0.5))  # D = 3.5
    assert whole_space_K(w, 1.5) == pytest.approx(2 ** (1 / 3.5) * sobolev_cp(w, 1.5), rel=1e-15)
    assert whole_space_K(w, 2.0) == sobolev_cp(w, 2.0)
    with pytest.raises(DomainError):
        whole_space_K(w, 3.5)


def test_trace_constants():
    w = Weight((0.0, 0.0))
    q, c = trace_constants(w, 2.0)
    assert q == 4.0
    assert c == pytest.approx(4.0**0.25 * sobolev_cp(Weight.zeros(3), 2.0) ** 0.25, rel=1e-14)
    q1, c1 = trace_constants(w, 1.0)
    assert q1 == 1.0 and c1 == 1.0
    with pytest.raises(DomainError):
        trace_constants(w, 3.0)


@pytest.mark.parametrize("C0", [0.5, 1.0, 10.0])
def test_refined_C_q_limit(C0):
    for w in (Weight((0.0, 0.0)), Weight((1.0, 2.0))):
        lim = refined_C_q_limit(w)
        assert refined_C_q(w, 2.0**20, C0) == pytest.approx(lim, rel=1e-4)


def test_refined_C_q_mpmath():
    w = Weight((1.0, 0.0, 0.5))
    D = w.D
    th = (D - 1) / D
    q, C0, m = 6.0, 3.0, 0.7
    ref = (mp.gamma(th * q + 1) * C0 * m) ** (1 / mp.mpf(q)) * (tm_alpha_D(w) * q) ** (-th)
    assert refined_C_q(w, q, C0, m) == pytest.approx(float(ref), rel=1e-13)


def test_refined_domain():
    with pytest.raises(DomainError):
        refined_C_q(Weight((0.0, 0.0)), 1.5)
    with pytest.raises(DomainError):
        refined_C_q(Weight((0.0, 0.0)), 4.0, C0=0.0)


@pytest.mark.parametrize("A", [(0.0, 0.0, 0.0), (1.0, 1.0), (2.0, 1.0, 0.0)])
def test_asymptotic_term_limit(A):
    w = Weight(A)
    t = asymptotic_term(w, 10**6)
    assert abs(t / asymptotic_limit(w) - 1) < 1e-4


def test_asymptotic_term_equals_tensor_constant():
    w = Weight((1.0, 0.5))
    for l in (1, 2, 3):
        assert asymptotic_term(w, l) == pytest.approx(l * sobolev_cp(w.repeat(l), 2.0) ** 2, rel=1e-13)


def test_asymptotic_limit_unweighted():
    assert asymptotic_limit(Weight.zeros(3)) == pytest.approx(2.0 / (3.0 * math.pi * math.e), rel=1e-15)


def test_constants_table_skips_inapplicable():
    t = constants_table(Weight((1.0, 1.0)))
    assert t.values["pi_A"] == pytest.approx(0.5)
    assert "Cp" not in t.values
    t = constants_table(Weight((0.0,)), p=2.0)
    assert "C1" not in t.values and "Cp" not in t.values
    t = constants_table(Weight.zeros(3), p=2.0, q=4.0)
    assert {"Cp", "p_star", "trace_q", "C_q"} <= set(t.values)

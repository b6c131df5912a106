import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from monosob.errors import DivergenceError, QuadratureAccuracyError, UnsupportedDimensionError
from monosob.funcspace import (
    ENT,
    GRAD,
    LP,
    MOMENT,
    Bump,
    CauchyProfile,
    ExpPower,
    Gaussian,
    Mixture,
    SobolevExtremal,
    TensorProduct,
    cauchy_integral,
    gaussian_moment,
    radial_bump_sum,
)
from monosob.quad import (
    DEFAULT_SPEC,
    Ball,
    Box,
    Functionals,
    QuadratureSpec,
    functionals_of,
    integrate_cubature,
    integrate_line,
    integrate_radial,
    integrate_separable,
)
from monosob.special import Weight, ball_geometry

QUAD_ONLY = QuadratureSpec(closed_forms=False)
exponents = st.lists(st.floats(0.0, 4.0, allow_nan=False), min_size=1, max_size=3)


@given(exponents, st.floats(0.3, 4.0), st.floats(0.25, 4.0))
def test_radial_matches_gaussian_moments(A, alpha, t):
    w = Weight(tuple(A))
    mass, mom = gaussian_moment(w, alpha, t)
    v, e = integrate_radial(lambda r: np.exp(-t * r**alpha), w, scale=t ** (-1 / alpha))
    assert v == pytest.approx(mass, rel=1e-9)
    v, e = integrate_radial(lambda r: r**alpha * np.exp(-t * r**alpha), w, scale=t ** (-1 / alpha))
    assert v == pytest.approx(mom, rel=1e-9)


@given(exponents, st.floats(0.25, 4.0), st.floats(0.2, 3.0))
def test_radial_algebraic_tail(A, sigma, extra):
    w = Weight(tuple(A))
    beta = w.D / 2 + extra
    v, e = integrate_radial(lambda r: (1 + sigma * r * r) ** -beta, w, scale=sigma**-0.5)
    assert v == pytest.approx(cauchy_integral(w, sigma, beta), rel=1e-9)


def test_slow_algebraic_tail_beats_naive_quadrature():
    # int_0^inf r^2 (1 + r^2)^(-1.6) dr = B(3/2, 1/10) / 2, a very slow tail
    w = Weight((0.0, 0.0, 0.0))
    v, _ = integrate_radial(lambda r: (1 + r * r) ** -1.6, w)
    ref = ball_geometry(w).perimeter * float(mp.beta(1.5, 0.1)) / 2
    assert v == pytest.approx(ref, rel=1e-9)


def test_divergent_tail_is_detected():
    w = Weight((0.0, 0.0, 0.0))
    with pytest.raises(DivergenceError):
        integrate_radial(lambda r: (1 + r * r) ** -1.0, w)


def test_integrate_line_weight_at_origin():
    # int_0^inf t^0.3 e^{-t} dt = Gamma(1.3)
    v, e, ok = integrate_line(lambda t: np.exp(-t), 0.3, 0.0, math.inf)
    assert ok and v == pytest.approx(math.gamma(1.3), rel=1e-12)
    # |t| weight on the full line
    v, e, ok = integrate_line(lambda t: np.exp(-t * t), 1.0, -math.inf, math.inf)
    assert v == pytest.approx(1.0, rel=1e-12)


def test_integrate_separable_product():
    w = Weight((1.0, 0.0))
    v, e = integrate_separable([lambda t: np.exp(-t * t), lambda t: np.exp(-t * t)], w)
    assert v == pytest.approx(0.5 * math.sqrt(math.pi), rel=1e-12)


def test_ball_measure_by_cubature():
    w = Weight((1.0, 1.0))
    v, e = integrate_cubature(lambda x: np.ones(len(x)), w, Ball(1.0))
    assert v == pytest.approx(0.125, rel=1e-8)
    w3 = Weight((0.5, 0.0))
    v, e = integrate_cubature(lambda x: np.ones(len(x)), w3, Ball(1.0))
    assert v == pytest.approx(ball_geometry(w3).measure, rel=1e-8)


def test_box_cubature_polynomial():
    w = Weight((0.5, 0.0))
    v, e = integrate_cubature(lambda x: x[:, 0] ** 2 + x[:, 1] ** 2, w, Box([0.0, -1.0], [2.0, 1.0]))
    # int_0^2 x^0.5 (x^2 * 2 + 2/3) dx
    ref = 2 * 2**3.5 / 3.5 + (2 / 3) * 2**1.5 / 1.5
    assert v == pytest.approx(ref, rel=1e-12)


ROUTE_CASES = [
    (Gaussian(Weight((1.0, 0.5)), 0.8), [LP(2), GRAD(2), ENT(2), MOMENT(2, 2.0), MOMENT(1, 1.0)]),
    (ExpPower(Weight((0.0, 2.0)), 1.5, 0.7), [LP(1), ENT(1), MOMENT(1, 1.5), GRAD(1)]),
    (SobolevExtremal(Weight((1.0, 1.0, 0.0)), 0.7, 1.3, 2.0), [LP(6), GRAD(2), LP(2)]),
    (SobolevExtremal(Weight((0.5, 1.5)), 1.0, 1.0, 1.6), [LP(1.6 * 4 / 2.4), GRAD(1.6)]),
    (CauchyProfile(Weight((1.0,)), 1.0, 1.5), [LP(1), LP(2), ENT(2), GRAD(2), MOMENT(1, 0.5)]),
]


@pytest.mark.parametrize("f,needs", ROUTE_CASES, ids=lambda v: getattr(v, "describe", lambda: {"family": ""})()["family"])
def test_quadrature_matches_closed_forms(f, needs):
    exact = functionals_of(f, needs, DEFAULT_SPEC)
    quad = functionals_of(f, needs, QUAD_ONLY)
    for nd in needs:
        assert quad[nd] == pytest.approx(exact[nd], rel=1e-9, abs=1e-12)
        assert quad.err(nd) <= 1e-9 * abs(quad[nd]) + 1e-12


def test_cubature_route_matches_structured_routes():
    w = Weight((1.0, 0.5))
    f = Gaussian(w, 0.6, center=[0.4, -0.3])
    needs = [LP(2), GRAD(2), ENT(2), MOMENT(2, 2.0)]
    sep = functionals_of(f, needs)
    cub = functionals_of(f, needs, route="cubature")
    for nd in needs:
        assert cub[nd] == pytest.approx(sep[nd], rel=1e-9)


def test_mixture_cubature_against_component_sum():
    w = Weight((1.0, 0.0))
    m = Mixture(w, [[0.5, 0.0], [1.5, 1.0]], [0.4, 0.9], [1.0, 0.5])
    parts = [Gaussian(w, 0.4, center=[0.5, 0.0], amplitude=1.0), Gaussian(w, 0.9, center=[1.5, 1.0], amplitude=0.5)]
    total = sum(functionals_of(p, [LP(1)])[LP(1)] for p in parts)
    assert functionals_of(m, [LP(1)])[LP(1)] == pytest.approx(total, rel=1e-10)


def test_bump_and_bump_sum_against_mpmath():
    w = Weight((1.0, 2.0))
    P = ball_geometry(w).perimeter
    f = Bump(w, 1.2, 3, 1.0)
    ref = P * mp.quad(lambda r: (1 - r * r / 1.44) ** 3 * r ** (w.D - 1), [0, 1.2])
    assert functionals_of(f, [LP(1)], QUAD_ONLY)[LP(1)] == pytest.approx(float(ref), rel=1e-10)
    g = radial_bump_sum(w, [0.5, 1.0], [2, 4], [1.0, 2.0])
    ref = P * mp.quad(lambda r: ((1 - 4 * r * r) ** 2 if r < 0.5 else 0) + 2 * (1 - r * r) ** 4, [0, 0.5, 1])
    ref = P * mp.quad(lambda r: (((1 - 4 * r * r) ** 2 if r < 0.5 else 0) + 2 * (1 - r * r) ** 4) * r ** (w.D - 1),
                      [0, 0.5, 1])
    assert functionals_of(g, [LP(1)])[LP(1)] == pytest.approx(float(ref), rel=1e-10)


def test_tensor_product_separable():
    f = TensorProduct([Gaussian(Weight((1.0,)), 0.5), CauchyProfile(Weight((0.0,)), 1.0, 1.5)])
    fl = functionals_of(f, [LP(2), GRAD(2), ENT(2)])
    cub = functionals_of(f, [LP(2), GRAD(2), ENT(2)], route="cubature")
    for nd in (LP(2), GRAD(2), ENT(2)):
        assert fl[nd] == pytest.approx(cub[nd], rel=1e-8)


def test_divergent_requests_raise():
    f = SobolevExtremal(Weight((1.0, 2.0)), 1.0, 1.0, 2.5)
    with pytest.raises(DivergenceError):
        functionals_of(f, [LP(2.5)], QUAD_ONLY)


def test_dimension_cap():
    w = Weight((0.0,) * 4)
    m = Mixture(w, [[0.0] * 4, [1.0] * 4], [1.0, 1.0], [1.0, 1.0])
    with pytest.raises(UnsupportedDimensionError):
        functionals_of(m, [LP(1)])


def test_accuracy_failure_raises_or_flags():
    w = Weight((0.5, 0.0))
    m = Mixture(w, [[0.3, 0.0], [1.0, 1.0]], [0.05, 1.0], [1.0, 1.0])
    tight = QuadratureSpec(rel_tol=1e-15, max_levels=1, nodes_per_panel=4)
    with pytest.raises(QuadratureAccuracyError):
        functionals_of(m, [LP(1)], tight)
    fl = functionals_of(m, [LP(1)], tight.with_(raise_on_failure=False))
    assert not fl.converged


def test_functionals_scaling_rule():
    w = Weight((1.0,))
    f = Gaussian(w, 1.0)
    g = Gaussian(w, 1.0, amplitude=2.5 * f.amplitude)
    needs = [LP(2), ENT(2), GRAD(2)]
    a = functionals_of(f, needs).scaled(2.5)
    b = functionals_of(g, needs)
    for nd in needs:
        assert a[nd] == pytest.approx(b[nd], rel=1e-13)


def test_spec_from_env(monkeypatch):
    monkeypatch.setenv("MONOSOB_TOL", "1e-7")
    assert QuadratureSpec.from_env().rel_tol == 1e-7
    assert QuadratureSpec.from_env(rel_tol=1e-9).rel_tol == 1e-9
    assert QuadratureSpec().tolerance(2.0) == 2e-10


def test_functionals_as_dict():
    fl = Functionals({LP(2): 1.0, MOMENT(1, 2.0): 3.0}, {LP(2): 1e-15, MOMENT(1, 2.0): 1e-14})
    d = fl.as_dict()
    assert d["lp(2)"]["value"] == 1.0 and d["moment(1,2)"]["value"] == 3.0

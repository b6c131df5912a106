import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from monosob.errors import DivergenceError, DomainError
from monosob.funcspace import (
    ENT,
    GRAD,
    LP,
    MOMENT,
    Bump,
    CauchyProfile,
    ExpPower,
    Gaussian,
    Indicator,
    Mixture,
    Scaled,
    SobolevExtremal,
    TensorProduct,
    TraceSlice,
    build_function,
    cauchy_integral,
    gaussian_moment,
    normalized_gaussian,
    phi_alpha,
    radial_bump_sum,
    radial_power_moment,
    region_factor,
    smoothed_indicator,
    tensorize,
    trace_slice,
)
from monosob.special import Weight, ball_geometry

exponents = st.lists(st.floats(0.0, 4.0, allow_nan=False), min_size=1, max_size=3)


def numeric_grad(f, x, h=1e-6):
    x = np.asarray(x, float)
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f.value((x + e)[None, :])[0] - f.value((x - e)[None, :])[0]) / (2 * h)
    return g


W2 = Weight((1.0, 0.5))
FUNCS = [
    Gaussian(W2, 0.7, center=[0.3, -0.2]),
    ExpPower(W2, 3.0, 0.5),
    SobolevExtremal(W2, 1.0, 2.0, 1.8),
    CauchyProfile(W2, 0.5, 2.0),
    Bump(W2, 1.5, 3, 2.0, center=[0.2, 0.1]),
    Mixture(W2, [[0.0, 0.5], [1.0, -1.0]], [0.5, 1.2], [1.0, 0.3]),
    Scaled(Gaussian(W2, 1.0), 1.7, 0.4),
    TensorProduct([Gaussian(Weight((1.0,)), 0.8, center=[0.4]), CauchyProfile(Weight((0.5,)), 1.0, 1.0)]),
    radial_bump_sum(W2, [0.5, 1.0], [2, 3], [1.0, 0.5]),
    smoothed_indicator(W2, 0.2, 1.0),
]


@pytest.mark.parametrize("f", FUNCS, ids=lambda f: f.describe()["family"])
def test_gradients_match_finite_differences(f):
    for x in ([0.31, 0.42], [0.8, -0.35], [0.05, 0.6]):
        g = f.grad(np.array([x]))[0]
        assert np.allclose(g, numeric_grad(f, x), rtol=1e-6, atol=1e-7)


@pytest.mark.parametrize("f", FUNCS, ids=lambda f: f.describe()["family"])
def test_value_shapes_and_describe(f):
    pts = np.random.default_rng(0).uniform(-1, 1, size=(7, 2))
    assert f.value(pts).shape == (7,)
    assert f.grad(pts).shape == (7, 2)
    d = f.describe()
    assert isinstance(d, dict) and "family" in d


def test_points_dimension_check():
    with pytest.raises(DomainError):
        Gaussian(W2).value(np.zeros((3, 3)))


def test_normalized_gaussian_has_unit_mass():
    for w in (Weight((0.0, 0.0)), Weight((1.0, 2.0, 0.5))):
        f = normalized_gaussian(w, 0.8)
        assert f.closed_form(LP(2), w.positive) == pytest.approx(1.0, rel=1e-14)


@given(exponents, st.floats(0.3, 4.0), st.floats(0.2, 5.0), st.floats(0.0, 3.0))
def test_radial_power_moment_mpmath(A, alpha, t, beta):
    w = Weight(tuple(A))
    P = ball_geometry(w).perimeter
    ref = P * mp.quad(lambda r: mp.exp(-t * r**alpha) * r ** (beta + w.D - 1), [0, 1, mp.inf])
    assert radial_power_moment(w, alpha, t, beta) == pytest.approx(float(ref), rel=1e-10)


@given(exponents, st.floats(0.3, 4.0), st.floats(0.2, 5.0))
def test_gaussian_moment_pair(A, alpha, t):
    w = Weight(tuple(A))
    mass, mom = gaussian_moment(w, alpha, t)
    assert mass == pytest.approx(radial_power_moment(w, alpha, t), rel=1e-12)
    assert mom == pytest.approx(radial_power_moment(w, alpha, t, alpha), rel=1e-12)
    # moment = D/(alpha t) * mass
    assert mom == pytest.approx(w.D / (alpha * t) * mass, rel=1e-12)


@given(exponents, st.floats(0.2, 4.0), st.floats(0.3, 3.0))
def test_cauchy_integral_mpmath(A, sigma, extra):
    w = Weight(tuple(A))
    beta = w.D / 2 + extra
    P = ball_geometry(w).perimeter
    # Beta-function form of the radial integral
    ref = P * mp.beta(w.D / 2, beta - w.D / 2) / (2 * mp.mpf(sigma) ** (w.D / 2))
    assert cauchy_integral(w, sigma, beta) == pytest.approx(float(ref), rel=1e-12)


def test_cauchy_integral_diverges():
    with pytest.raises(DivergenceError):
        cauchy_integral(Weight((1.0, 1.0)), 1.0, 2.0)


def test_region_factor():
    w = Weight((1.0, 0.0))
    assert region_factor(w, (True, False)) == 1.0
    assert region_factor(w, (False, False)) == 2.0
    assert region_factor(w, (True, True)) == 0.5


def test_phi_alpha_unit_mass_and_entropy():
    for alpha in (1.0, 2.0, 3.0):
        w = Weight((0.5, 1.0))
        f = phi_alpha(w, alpha)
        assert f.closed_form(LP(1), w.positive) == pytest.approx(1.0, rel=1e-13)
        assert f.closed_form(ENT(1), w.positive) == pytest.approx(-w.D / alpha, rel=1e-12)


def test_extremal_divergence_rules():
    w = Weight((1.0, 2.0, 3.0))  # D = 9
    f = SobolevExtremal(w, 1.0, 1.0, 2.5)
    # the extremal is in L^p iff p < sqrt(D)
    assert f.closed_form(LP(2.5), w.positive) > 0
    g = SobolevExtremal(Weight((1.0, 2.0)), 1.0, 1.0, 2.5)  # D = 5 > 2.5^2 fails
    with pytest.raises(DivergenceError):
        g.closed_form(LP(2.5), g.weight.positive)
    with pytest.raises(DomainError):
        SobolevExtremal(Weight((1.0,)), 1.0, 1.0, 2.5)


def test_cauchy_profile_divergence():
    f = CauchyProfile(Weight((1.0, 1.0)), 1.0, 1.2)
    with pytest.raises(DivergenceError):
        f.closed_form(LP(1), (True, True))
    assert f.closed_form(LP(2), (True, True)) > 0


def test_indicator_is_normalized_and_has_perimeter_tv():
    w = Weight((1.0, 1.0))
    f = build_function("indicator", w, R=1.0)
    assert isinstance(f, Indicator)
    g = ball_geometry(w)
    assert f.closed_form(LP(1), w.positive) == pytest.approx(1.0, rel=1e-14)
    assert f.closed_form(GRAD(1), w.positive) == pytest.approx(g.perimeter / g.measure, rel=1e-14)
    assert f.distributional_gradient


def test_scaled_closed_forms_follow_scaling_laws():
    w = Weight((1.0, 0.5))
    base = Gaussian(w, 1.3)
    f = Scaled(base, 1.7, 0.6)
    ref = Gaussian(w, 1.3 / 1.7**2, amplitude=0.6 * base.amplitude)
    for need in (LP(2), GRAD(2), ENT(2), MOMENT(1, 2.0)):
        assert f.closed_form(need, w.positive) == pytest.approx(ref.closed_form(need, w.positive), rel=1e-12)


def test_tensorize_and_factors():
    f = Gaussian(Weight((1.0,)), 0.5)
    F = tensorize(f, 3)
    assert F.weight == Weight((1.0, 1.0, 1.0))
    x = np.array([[0.3, 0.2, 0.9]])
    assert F.value(x)[0] == pytest.approx(np.prod([f.value(np.array([[t]]))[0] for t in x[0]]))


def test_trace_slice_structure():
    w = Weight((1.0, 0.0))
    g = Gaussian(w, 1.0, center=[0.0, 0.5])
    s = trace_slice(g)
    assert isinstance(s, Gaussian) and s.weight == Weight((1.0,))
    assert s.value(np.array([[0.4]]))[0] == pytest.approx(g.value(np.array([[0.4, 0.0]]))[0])
    t = TensorProduct([Gaussian(Weight((1.0,)), 1.0), CauchyProfile(Weight((0.0,)), 1.0, 1.0, 3.0)])
    st_ = trace_slice(t)
    assert st_.value(np.array([[0.4]]))[0] == pytest.approx(t.value(np.array([[0.4, 0.0]]))[0])
    m = Mixture(w, [[0.2, 0.3]], [1.0], [1.0])
    assert isinstance(trace_slice(m), TraceSlice)


def test_extent_bounds_function_outside():
    for f in FUNCS[:6]:
        box = f.extent(1e-14)
        corner = box[:, 1] + 0.5
        assert abs(f.value(corner[None, :])[0]) < 1e-12


def test_build_function_registry():
    w = Weight((0.0, 0.0))
    f = build_function("gaussian", w, sigma=2.0)
    assert isinstance(f, Gaussian) and f.sigma == 2.0
    f = build_function("mixture", w, centers=[[0, 0], [1, 1]], sigmas=[1, 2], amps=[1, 1])
    assert isinstance(f, Mixture)
    with pytest.raises(DomainError):
        build_function("nope", w)
    with pytest.raises(DomainError):
        build_function("gaussian", w, width=3)


def test_bump_validation():
    with pytest.raises(DomainError):
        Bump(W2, 1.0, 1)
    with pytest.raises(DomainError):
        Bump(W2, -1.0, 3)

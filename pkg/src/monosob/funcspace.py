"""Analytic test functions on weighted cones, with exact gradients.

Every family evaluates vectorised over points of shape ``(..., n)``.  Structure
that the integrators exploit is exposed through three hooks:

* :meth:`TestFunction.radial` -- profile and derivative in ``r = |x|``;
* :meth:`TestFunction.factors` -- a product over consecutive coordinate blocks;
* :meth:`TestFunction.closed_form` -- exact weighted functionals, where known.

A functional request is a :class:`Need`; a region is a tuple of booleans, one
per coordinate, marking coordinates restricted to ``x_i > 0``.  The natural
region of a weight is ``w.positive``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.special import betaln

from .errors import DivergenceError, DomainError, SingularPointError
from .special import Weight, ball_geometry, log_gamma, log_pi_A, pi_A

__all__ = [
    "Need",
    "LP",
    "GRAD",
    "ENT",
    "MOMENT",
    "RadialForm",
    "TestFunction",
    "Gaussian",
    "ExpPower",
    "SobolevExtremal",
    "CauchyProfile",
    "Bump",
    "Indicator",
    "RadialProfile",
    "TensorProduct",
    "Mixture",
    "Scaled",
    "TraceSlice",
    "trace_slice",
    "FAMILIES",
    "build_function",
    "tensorize",
    "phi_alpha",
    "normalized_gaussian",
    "smoothed_indicator",
    "radial_bump_sum",
    "gaussian_moment",
    "radial_power_moment",
    "cauchy_integral",
    "region_factor",
    "eval",
    "eval_grad",
]


class Need(NamedTuple):
    """One weighted functional of f.

    kind ``lp``: int |f|^s; ``grad``: int |grad f|^s; ``ent``: int |f|^s log |f|^s;
    ``moment``: int |f|^s |x|^alpha.  All against x^A dx over the region.
    """

    kind: str
    s: float
    alpha: float = 0.0


def LP(s):
    return Need("lp", float(s))


def GRAD(s):
    return Need("grad", float(s))


def ENT(s):
    return Need("ent", float(s))


def MOMENT(s, alpha):
    return Need("moment", float(s), float(alpha))


def region_factor(w: Weight, region: Sequence[bool]) -> float:
    """Ratio of a radial integral over ``region`` to the same integral over the cone."""
    if len(region) != w.n:
        raise DomainError("region length must match the weight dimension")
    doubled = sum(1 for a, pos in zip(w.A, region) if a > 0 and not pos)
    halved = sum(1 for a, pos in zip(w.A, region) if a == 0 and pos)
    return 2.0 ** (doubled - halved)


# ---------------------------------------------------------------- closed forms


def radial_power_moment(w: Weight, alpha: float, t: float, beta: float = 0.0) -> float:
    """int exp(-t|x|^alpha) |x|^beta x^A dx over the cone."""
    if not (alpha > 0 and t > 0):
        raise DomainError("alpha and t must be positive")
    D = w.D
    if not beta + D > 0:
        raise DivergenceError("moment diverges at the origin")
    P = ball_geometry(w).perimeter
    s = (beta + D) / alpha
    return P * math.exp(log_gamma(s) - s * math.log(t)) / alpha


def gaussian_moment(w: Weight, alpha: float, t: float) -> tuple[float, float]:
    """Exact (int e^{-t|x|^a} x^A dx, int e^{-t|x|^a} |x|^a x^A dx)."""
    alpha = float(alpha)
    t = float(t)
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha!r}")
    if not t > 0:
        raise DomainError(f"t must be positive, got {t!r}")
    D = w.D
    log_common = log_gamma(D / alpha + 1.0) - log_gamma(D / 2.0 + 1.0) + 0.5 * D * log_pi_A(w)
    mass = math.exp(-(D / alpha) * math.log(t) + log_common)
    moment = (D / alpha) * math.exp(-(D / alpha + 1.0) * math.log(t) + log_common)
    return mass, moment


def cauchy_integral(w: Weight, sigma: float, beta: float) -> float:
    """Exact int (1 + sigma|x|^2)^-beta x^A dx, finite for beta > D/2."""
    D = w.D
    if not sigma > 0:
        raise DomainError(f"sigma must be positive, got {sigma!r}")
    if not beta > D / 2.0:
        raise DivergenceError(f"Cauchy profile integral diverges for beta={beta:g} <= D/2={D / 2:g}")
    log_v = 0.5 * D * (log_pi_A(w) - math.log(sigma)) + log_gamma(beta - D / 2.0) - log_gamma(beta)
    return math.exp(log_v)


# ---------------------------------------------------------------- base class


@dataclass(frozen=True)
class RadialForm:
    """f(x) = rho(|x|), with f's support inside |x| <= support when given."""

    rho: Callable[[np.ndarray], np.ndarray]
    drho: Callable[[np.ndarray], np.ndarray]
    scale: float
    support: float | None = None
    breakpoints: tuple[float, ...] = ()


def _points(x, n):
    x = np.asarray(x, dtype=float)
    if x.ndim == 0 or x.shape[-1] != n:
        if n == 1:
            x = x[..., None]
        else:
            raise DomainError(f"points must have trailing dimension {n}")
    return x


class TestFunction:
    """Base class; subclasses set ``weight`` and implement value/grad."""

    __test__ = False  # keep pytest from collecting this as a test class

    weight: Weight
    singular_set = None

    @property
    def n(self) -> int:
        return self.weight.n

    def value(self, x) -> np.ndarray:
        raise NotImplementedError

    def grad(self, x) -> np.ndarray:
        raise NotImplementedError

    def radial(self) -> RadialForm | None:
        return None

    def factors(self) -> list["TestFunction"] | None:
        return None

    def closed_form(self, need: Need, region: Sequence[bool]) -> float | None:
        return None

    def extent(self, tol: float) -> np.ndarray:
        """Per-coordinate box on R^n outside which |f| and |grad f| drop below ``tol``."""
        raise NotImplementedError

    @property
    def length_scale(self) -> float:
        return 1.0

    def support_ball(self) -> tuple[np.ndarray, float] | None:
        """(centre, radius) of a ball containing the support, when compact."""
        form = self.radial()
        if form is not None and form.support is not None:
            return np.zeros(self.n), float(form.support)
        return None

    def features(self) -> list[np.ndarray]:
        """Per-coordinate notable abscissae (centres, kinks) for 1-D rules."""
        return [np.array([]) for _ in range(self.n)]

    def describe(self) -> dict:
        raise NotImplementedError

    def __call__(self, x):
        return self.value(x)


def eval(f: TestFunction, x):
    return f.value(x)


def eval_grad(f: TestFunction, x):
    return f.grad(x)


class _RadialMixin:
    """value/grad in terms of the radial form."""

    def value(self, x):
        x = _points(x, self.n)
        self._check_singular(x)
        r = np.sqrt(np.sum(x * x, axis=-1))
        return self.radial().rho(r)

    def grad(self, x):
        x = _points(x, self.n)
        self._check_singular(x)
        r = np.sqrt(np.sum(x * x, axis=-1))
        form = self.radial()
        safe = np.where(r > 0, r, 1.0)
        d = np.where(r > 0, form.drho(safe) / safe, 0.0)
        return d[..., None] * x

    def _check_singular(self, x):
        pass

    def extent(self, tol):
        R = self._radius(tol)
        return np.array([[-R, R]] * self.n)

    def _radius(self, tol):
        form = self.radial()
        if form.support is not None:
            return form.support
        raise NotImplementedError


def _log_tol(tol):
    return math.log(1.0 / max(tol, 1e-300))


# ---------------------------------------------------------------- Gaussians


class Gaussian(TestFunction):
    """amplitude * exp(-|x - center|^2 / (4 sigma)).

    With ``amplitude=None`` the amplitude is (2 sigma Pi(A))^(-D/4), which has
    unit weighted L^2 mass when centred.
    """

    def __init__(self, weight: Weight, sigma: float = 1.0, center=None, amplitude=None):
        if not sigma > 0:
            raise DomainError(f"sigma must be positive, got {sigma!r}")
        self.weight = weight
        self.sigma = float(sigma)
        c = np.zeros(weight.n) if center is None else np.asarray(center, dtype=float).reshape(weight.n)
        self.center = c
        if amplitude is None:
            amplitude = (2.0 * self.sigma * pi_A(weight)) ** (-weight.D / 4.0)
        self.amplitude = float(amplitude)

    @property
    def centered(self):
        return not np.any(self.center)

    def value(self, x):
        x = _points(x, self.n)
        d2 = np.sum((x - self.center) ** 2, axis=-1)
        return self.amplitude * np.exp(-d2 / (4.0 * self.sigma))

    def grad(self, x):
        x = _points(x, self.n)
        v = self.value(x)
        return (-(x - self.center) / (2.0 * self.sigma)) * v[..., None]

    def radial(self):
        if not self.centered:
            return None
        a, s4 = self.amplitude, 4.0 * self.sigma
        return RadialForm(
            rho=lambda r: a * np.exp(-r * r / s4),
            drho=lambda r: -(2.0 * r / s4) * a * np.exp(-r * r / s4),
            scale=math.sqrt(2.0 * self.sigma),
        )

    def factors(self):
        if self.centered or self.n == 1:
            return None
        out = []
        for i, a in enumerate(self.weight.A):
            amp = self.amplitude if i == 0 else 1.0
            out.append(Gaussian(Weight((a,)), self.sigma, center=[self.center[i]], amplitude=amp))
        return out

    def closed_form(self, need, region):
        if not self.centered:
            return None
        w = self.weight
        fac = region_factor(w, region)
        a, s = self.amplitude, need.s
        t = s / (4.0 * self.sigma)
        if need.kind == "lp":
            return fac * a**s * radial_power_moment(w, 2.0, t)
        if need.kind == "moment":
            return fac * a**s * radial_power_moment(w, 2.0, t, need.alpha)
        if need.kind == "grad":
            return fac * a**s * (2.0 * self.sigma) ** (-s) * radial_power_moment(w, 2.0, t, s)
        if need.kind == "ent":
            lp = a**s * radial_power_moment(w, 2.0, t)
            m2 = a**s * radial_power_moment(w, 2.0, t, 2.0)
            return fac * (s * math.log(a) * lp - t * m2)
        return None

    def extent(self, tol):
        d = math.sqrt(4.0 * self.sigma * (_log_tol(tol) + math.log(max(self.amplitude, 1.0)) + 3.0))
        return np.stack([self.center - d, self.center + d], axis=1)

    @property
    def length_scale(self):
        return math.sqrt(2.0 * self.sigma)

    def features(self):
        return [np.array([c]) for c in self.center]

    def describe(self):
        return {
            "family": "gaussian",
            "A": list(self.weight.A),
            "sigma": self.sigma,
            "center": [float(c) for c in self.center],
            "amplitude": self.amplitude,
        }


def normalized_gaussian(weight: Weight, sigma: float = 1.0) -> Gaussian:
    """(2 sigma Pi(A))^(-D/4) exp(-|x|^2/(4 sigma)); unit L^2 mass, second moment D sigma."""
    return Gaussian(weight, sigma)


class ExpPower(_RadialMixin, TestFunction):
    """amplitude * exp(-t |x|^alpha)."""

    def __init__(self, weight: Weight, alpha: float, t: float, amplitude: float = 1.0):
        if not (alpha > 0 and t > 0):
            raise DomainError("alpha and t must be positive")
        self.weight = weight
        self.alpha = float(alpha)
        self.t = float(t)
        self.amplitude = float(amplitude)

    def radial(self):
        a, t, al = self.amplitude, self.t, self.alpha
        return RadialForm(
            rho=lambda r: a * np.exp(-t * r**al),
            drho=lambda r: -a * t * al * r ** (al - 1.0) * np.exp(-t * r**al),
            scale=self.length_scale,
        )

    @property
    def length_scale(self):
        return self.t ** (-1.0 / self.alpha)

    def _radius(self, tol):
        L = _log_tol(tol) + math.log(max(self.amplitude, 1.0)) + 3.0
        return (2.0 * L / self.t) ** (1.0 / self.alpha)

    def closed_form(self, need, region):
        w = self.weight
        fac = region_factor(w, region)
        a, s, al, t = self.amplitude, need.s, self.alpha, self.t
        ts = s * t
        if need.kind == "lp":
            return fac * a**s * radial_power_moment(w, al, ts)
        if need.kind == "moment":
            return fac * a**s * radial_power_moment(w, al, ts, need.alpha)
        if need.kind == "grad":
            beta = s * (al - 1.0)
            if beta + w.D <= 0:
                raise DivergenceError("gradient norm diverges at the origin")
            return fac * (a * t * al) ** s * radial_power_moment(w, al, ts, beta)
        if need.kind == "ent":
            lp = a**s * radial_power_moment(w, al, ts)
            mom = a**s * radial_power_moment(w, al, ts, al)
            return fac * (s * math.log(a) * lp - ts * mom)
        return None

    def describe(self):
        return {"family": "exp_power", "A": list(self.weight.A), "alpha": self.alpha, "t": self.t,
                "amplitude": self.amplitude}


def phi_alpha(weight: Weight, alpha: float) -> ExpPower:
    """exp(-C_A(alpha) |x|^alpha), the unit-mass Shannon extremal."""
    from .constants import shannon_c_A

    return ExpPower(weight, alpha, shannon_c_A(weight, alpha))


# ---------------------------------------------------------------- algebraic profiles


class SobolevExtremal(_RadialMixin, TestFunction):
    """(a + b |x|^(p/(p-1)))^(1 - D/p)."""

    def __init__(self, weight: Weight, a: float = 1.0, b: float = 1.0, p: float = 2.0):
        D = weight.D
        if not (a > 0 and b > 0):
            raise DomainError("a and b must be positive")
        if not (1.0 < p < D):
            raise DomainError(f"extremal needs 1 < p < D={D:g}, got p={p!r}")
        self.weight = weight
        self.a, self.b, self.p = float(a), float(b), float(p)

    @property
    def conj(self):
        return self.p / (self.p - 1.0)

    @property
    def exponent(self):
        return 1.0 - self.weight.D / self.p

    def radial(self):
        a, b, pp, e = self.a, self.b, self.conj, self.exponent
        return RadialForm(
            rho=lambda r: (a + b * r**pp) ** e,
            drho=lambda r: e * (a + b * r**pp) ** (e - 1.0) * b * pp * r ** (pp - 1.0),
            scale=self.length_scale,
        )

    @property
    def length_scale(self):
        return (self.a / self.b) ** (1.0 / self.conj)

    def _radius(self, tol):
        # algebraic decay: f ~ b^e r^(pp e); pick where it falls below tol
        decay = -self.conj * self.exponent
        return self.length_scale * (1.0 / tol) ** (1.0 / decay)

    def _algebraic(self, s_gamma, beta, coef, region):
        """coef * int (a + b r^k)^(-s_gamma) r^beta x^A dx, k = p'."""
        w = self.weight
        D, k, a, b = w.D, self.conj, self.a, self.b
        z = (beta + D) / k
        if not (z > 0 and s_gamma > z):
            raise DivergenceError(
                f"integral of the Sobolev extremal diverges (decay {s_gamma * k:g} vs {beta + D:g})"
            )
        P = ball_geometry(w).perimeter * region_factor(w, region)
        log_v = (math.log(P / k) + z * math.log(a / b) - s_gamma * math.log(a)
                 + betaln(z, s_gamma - z))
        return coef * math.exp(log_v)

    def closed_form(self, need, region):
        s, e, k = need.s, self.exponent, self.conj
        if need.kind == "lp":
            return self._algebraic(-e * s, 0.0, 1.0, region)
        if need.kind == "moment":
            return self._algebraic(-e * s, need.alpha, 1.0, region)
        if need.kind == "grad":
            return self._algebraic((1.0 - e) * s, (k - 1.0) * s, (-e * self.b * k) ** s, region)
        if need.kind == "ent":
            self._algebraic(-e * s, 0.0, 1.0, region)  # integrability of |f|^s
        return None

    def describe(self):
        return {"family": "sobolev_extremal", "A": list(self.weight.A), "a": self.a, "b": self.b,
                "p": self.p}


class CauchyProfile(_RadialMixin, TestFunction):
    """amplitude * (1 + sigma |x|^2)^(-beta); beta > D/4 keeps the L^2 mass finite."""

    def __init__(self, weight: Weight, sigma: float = 1.0, beta: float = 2.0, amplitude: float = 1.0):
        if not sigma > 0:
            raise DomainError("sigma must be positive")
        if not beta > weight.D / 4.0:
            raise DomainError(f"beta must exceed D/4={weight.D / 4:g} for a finite L^2 mass")
        self.weight = weight
        self.sigma, self.beta, self.amplitude = float(sigma), float(beta), float(amplitude)

    def radial(self):
        c, s, b = self.amplitude, self.sigma, self.beta
        return RadialForm(
            rho=lambda r: c * (1.0 + s * r * r) ** (-b),
            drho=lambda r: -2.0 * b * s * r * c * (1.0 + s * r * r) ** (-b - 1.0),
            scale=self.length_scale,
        )

    @property
    def length_scale(self):
        return 1.0 / math.sqrt(self.sigma)

    def _radius(self, tol):
        return self.length_scale * (1.0 / tol) ** (1.0 / (2.0 * self.beta))

    def closed_form(self, need, region):
        fac = region_factor(self.weight, region)
        if need.kind == "lp":
            return fac * self.amplitude**need.s * cauchy_integral(self.weight, self.sigma, self.beta * need.s)
        D = self.weight.D
        if need.kind == "moment" and 2.0 * self.beta * need.s - need.alpha <= D:
            raise DivergenceError(
                f"moment of order {need.alpha:g} diverges for the Cauchy profile "
                f"(needs alpha < 2 beta s - D)"
            )
        if need.kind == "ent" and 2.0 * self.beta * need.s <= D:
            raise DivergenceError("entropy integral diverges for the Cauchy profile")
        if need.kind == "grad" and (2.0 * self.beta + 1.0) * need.s <= D:
            raise DivergenceError("gradient norm diverges for the Cauchy profile")
        return None

    def describe(self):
        return {"family": "cauchy", "A": list(self.weight.A), "sigma": self.sigma, "beta": self.beta,
                "amplitude": self.amplitude}


# ---------------------------------------------------------------- compact support


class Bump(TestFunction):
    """amplitude * (1 - |x - center|^2 / R^2)_+^m, integer m >= 2."""

    def __init__(self, weight: Weight, R: float = 1.0, m: int = 3, amplitude: float = 1.0, center=None):
        if not R > 0:
            raise DomainError("bump radius must be positive")
        if int(m) != m or m < 2:
            raise DomainError("bump order m must be an integer >= 2")
        self.weight = weight
        self.R, self.m, self.amplitude = float(R), int(m), float(amplitude)
        self.center = np.zeros(weight.n) if center is None else np.asarray(center, float).reshape(weight.n)

    @property
    def centered(self):
        return not np.any(self.center)

    def support_ball(self):
        return self.center.copy(), self.R

    def _u(self, x):
        x = _points(x, self.n)
        d = x - self.center
        return d, np.clip(1.0 - np.sum(d * d, axis=-1) / self.R**2, 0.0, None)

    def value(self, x):
        _, u = self._u(x)
        return self.amplitude * u**self.m

    def grad(self, x):
        d, u = self._u(x)
        coef = -2.0 * self.m * self.amplitude * u ** (self.m - 1) / self.R**2
        return coef[..., None] * d

    def radial(self):
        if not self.centered:
            return None
        a, R, m = self.amplitude, self.R, self.m
        return RadialForm(
            rho=lambda r: a * np.clip(1.0 - (r / R) ** 2, 0.0, None) ** m,
            drho=lambda r: -2.0 * m * a * r / R**2 * np.clip(1.0 - (r / R) ** 2, 0.0, None) ** (m - 1),
            scale=R,
            support=R,
        )

    def closed_form(self, need, region):
        if not self.centered:
            return None
        w = self.weight
        D = w.D
        P = ball_geometry(w).perimeter * region_factor(w, region)
        a, R, m, s = self.amplitude, self.R, self.m, need.s

        def radial_beta(beta, power):
            # int_0^R r^(beta+D-1) (1 - r^2/R^2)^power dr
            return 0.5 * R ** (beta + D) * math.exp(betaln((beta + D) / 2.0, power + 1.0))

        if need.kind == "lp":
            return P * a**s * radial_beta(0.0, m * s)
        if need.kind == "moment":
            return P * a**s * radial_beta(need.alpha, m * s)
        if need.kind == "grad":
            return P * (2.0 * m * a / R**2) ** s * radial_beta(s, (m - 1) * s)
        return None

    def extent(self, tol):
        return np.stack([self.center - self.R, self.center + self.R], axis=1)

    @property
    def length_scale(self):
        return self.R

    def features(self):
        return [np.array([c - self.R, c, c + self.R]) for c in self.center]

    def describe(self):
        return {"family": "bump", "A": list(self.weight.A), "R": self.R, "m": self.m,
                "amplitude": self.amplitude, "center": [float(c) for c in self.center]}


class Indicator(_RadialMixin, TestFunction):
    """amplitude * 1{|x| < R}; its gradient is the surface measure of the sphere.

    The L^1 gradient request returns the weighted total variation
    amplitude * R^(D-1) * P(B_1^A); higher gradient norms are infinite.
    """

    distributional_gradient = True

    def __init__(self, weight: Weight, R: float = 1.0, amplitude: float = 1.0):
        if not R > 0:
            raise DomainError("radius must be positive")
        self.weight = weight
        self.R, self.amplitude = float(R), float(amplitude)

    @classmethod
    def normalized(cls, weight: Weight, R: float = 1.0) -> "Indicator":
        """Unit weighted L^1 mass."""
        return cls(weight, R, 1.0 / (ball_geometry(weight).measure * R**weight.D))

    def _check_singular(self, x):
        r = np.sqrt(np.sum(x * x, axis=-1))
        if np.any(r == self.R):
            raise SingularPointError("indicator evaluated on its boundary sphere")

    def radial(self):
        a, R = self.amplitude, self.R
        return RadialForm(
            rho=lambda r: np.where(r < R, a, 0.0),
            drho=lambda r: np.zeros_like(r),
            scale=R,
            support=R,
        )

    def closed_form(self, need, region):
        w = self.weight
        D = w.D
        geom = ball_geometry(w)
        fac = region_factor(w, region)
        a, R, s = self.amplitude, self.R, need.s
        if need.kind == "lp":
            return fac * a**s * geom.measure * R**D
        if need.kind == "ent":
            return fac * a**s * math.log(a**s) * geom.measure * R**D
        if need.kind == "moment":
            return fac * a**s * geom.perimeter * R ** (D + need.alpha) / (D + need.alpha)
        if need.kind == "grad":
            if s == 1.0:
                return fac * a * geom.perimeter * R ** (D - 1.0)
            raise DivergenceError("indicator has no L^p gradient for p > 1")
        return None

    def describe(self):
        return {"family": "indicator", "A": list(self.weight.A), "R": self.R, "amplitude": self.amplitude}


class RadialProfile(_RadialMixin, TestFunction):
    """Arbitrary radial function given by a profile and its derivative.

    ``params`` only feeds :meth:`describe`; keep it JSON-serialisable.
    """

    def __init__(self, weight, rho, drho, *, scale=1.0, support=None, decay_radius=None,
                 breakpoints=(), label="radial", params=None):
        self.weight = weight
        self._form = RadialForm(rho=rho, drho=drho, scale=float(scale), support=support,
                                breakpoints=tuple(breakpoints))
        self._decay_radius = decay_radius
        self.label = label
        self.params = dict(params or {})

    def radial(self):
        return self._form

    @property
    def length_scale(self):
        return self._form.scale

    def _radius(self, tol):
        if self._form.support is not None:
            return self._form.support
        if self._decay_radius is None:
            raise DomainError("radial profile without support needs decay_radius for truncation")
        return self._decay_radius(tol)

    def describe(self):
        return {"family": "radial", "label": self.label, "A": list(self.weight.A), **self.params}


def smoothed_indicator(weight: Weight, width: float, R: float = 1.0, amplitude: float = 1.0) -> RadialProfile:
    """1 on |x| <= R - width, falling C^1-smoothly to 0 at |x| = R."""
    if not 0 < width <= R:
        raise DomainError("width must lie in (0, R]")
    r0 = R - width

    def rho(r):
        t = np.clip((r - r0) / width, 0.0, 1.0)
        return amplitude * (1.0 - t * t) ** 2

    def drho(r):
        t = np.clip((r - r0) / width, 0.0, 1.0)
        inside = (r > r0) & (r < R)
        return np.where(inside, amplitude * 2.0 * (1.0 - t * t) * (-2.0 * t) / width, 0.0)

    return RadialProfile(weight, rho, drho, scale=R, support=R, breakpoints=(r0,),
                         label="smoothed_indicator", params={"width": width, "R": R, "amplitude": amplitude})


def radial_bump_sum(weight: Weight, radii, orders, amps) -> RadialProfile:
    """sum_j amps_j (1 - r^2/radii_j^2)_+^orders_j, supported in the largest radius."""
    radii = [float(r) for r in radii]
    orders = [int(m) for m in orders]
    amps = [float(a) for a in amps]

    def rho(r):
        out = np.zeros_like(np.asarray(r, float))
        for R, m, a in zip(radii, orders, amps):
            out = out + a * np.clip(1.0 - (r / R) ** 2, 0.0, None) ** m
        return out

    def drho(r):
        out = np.zeros_like(np.asarray(r, float))
        for R, m, a in zip(radii, orders, amps):
            out = out - 2.0 * m * a * r / R**2 * np.clip(1.0 - (r / R) ** 2, 0.0, None) ** (m - 1)
        return out

    R = max(radii)
    return RadialProfile(weight, rho, drho, scale=min(radii), support=R, breakpoints=tuple(sorted(radii)[:-1]),
                         label="bump_sum", params={"radii": radii, "orders": orders, "amps": amps})


# ---------------------------------------------------------------- composites


class TensorProduct(TestFunction):
    """F(x^1, ..., x^l) = prod_i f_i(x^i) over consecutive coordinate blocks."""

    def __init__(self, parts: Sequence[TestFunction]):
        if not parts:
            raise DomainError("tensor product needs at least one factor")
        self.parts = list(parts)
        w = self.parts[0].weight
        for f in self.parts[1:]:
            w = w.concat(f.weight)
        self.weight = w
        sizes = [f.n for f in self.parts]
        self._slices = []
        start = 0
        for s in sizes:
            self._slices.append(slice(start, start + s))
            start += s

    def value(self, x):
        x = _points(x, self.n)
        out = None
        for f, sl in zip(self.parts, self._slices):
            v = f.value(x[..., sl])
            out = v if out is None else out * v
        return out

    def grad(self, x):
        x = _points(x, self.n)
        vals = [f.value(x[..., sl]) for f, sl in zip(self.parts, self._slices)]
        g = np.empty(x.shape, dtype=float)
        for i, (f, sl) in enumerate(zip(self.parts, self._slices)):
            others = np.ones(x.shape[:-1])
            for j, v in enumerate(vals):
                if j != i:
                    others = others * v
            g[..., sl] = f.grad(x[..., sl]) * others[..., None]
        return g

    def factors(self):
        return list(self.parts)

    def extent(self, tol):
        return np.concatenate([f.extent(tol) for f in self.parts], axis=0)

    @property
    def length_scale(self):
        return min(f.length_scale for f in self.parts)

    def features(self):
        out = []
        for f in self.parts:
            out.extend(f.features())
        return out

    def describe(self):
        return {"family": "tensor", "A": list(self.weight.A), "parts": [f.describe() for f in self.parts]}


def tensorize(f: TestFunction, l: int) -> TestFunction:
    """Product of l copies of f on R^{ln}; l = 1 returns f itself."""
    if l < 1:
        raise DomainError("l must be at least 1")
    if l == 1:
        return f
    return TensorProduct([f] * l)


class Mixture(TestFunction):
    """Positive combination of Gaussians amp_j exp(-|x - c_j|^2 / (4 sigma_j))."""

    def __init__(self, weight: Weight, centers, sigmas, amps):
        self.weight = weight
        self.centers = np.asarray(centers, dtype=float).reshape(-1, weight.n)
        self.sigmas = np.asarray(sigmas, dtype=float).reshape(-1)
        self.amps = np.asarray(amps, dtype=float).reshape(-1)
        if not (len(self.centers) == len(self.sigmas) == len(self.amps) >= 1):
            raise DomainError("mixture needs matching, nonempty component lists")
        if np.any(self.sigmas <= 0) or np.any(self.amps <= 0):
            raise DomainError("mixture scales and amplitudes must be positive")

    def _terms(self, x):
        x = _points(x, self.n)
        d = x[..., None, :] - self.centers  # (..., J, n)
        e = self.amps * np.exp(-np.sum(d * d, axis=-1) / (4.0 * self.sigmas))
        return d, e

    def value(self, x):
        _, e = self._terms(x)
        return np.sum(e, axis=-1)

    def grad(self, x):
        d, e = self._terms(x)
        return np.sum((-d / (2.0 * self.sigmas[:, None])) * e[..., None], axis=-2)

    def radial(self):
        if np.any(self.centers):
            return None
        amps, s4 = self.amps.copy(), 4.0 * self.sigmas

        def rho(r):
            r = np.asarray(r, float)
            return np.sum(amps * np.exp(-(r[..., None] ** 2) / s4), axis=-1)

        def drho(r):
            r = np.asarray(r, float)
            return np.sum(-(2.0 * r[..., None] / s4) * amps * np.exp(-(r[..., None] ** 2) / s4), axis=-1)

        return RadialForm(rho=rho, drho=drho, scale=self.length_scale)

    def extent(self, tol):
        L = _log_tol(tol) + math.log(max(float(np.sum(self.amps)), 1.0)) + 3.0
        d = np.sqrt(4.0 * self.sigmas * L)
        lo = np.min(self.centers - d[:, None], axis=0)
        hi = np.max(self.centers + d[:, None], axis=0)
        return np.stack([lo, hi], axis=1)

    @property
    def length_scale(self):
        return float(np.sqrt(2.0 * np.min(self.sigmas)))

    def features(self):
        return [self.centers[:, i].copy() for i in range(self.n)]

    def describe(self):
        return {
            "family": "mixture",
            "A": list(self.weight.A),
            "centers": self.centers.tolist(),
            "sigmas": self.sigmas.tolist(),
            "amps": self.amps.tolist(),
        }


class Scaled(TestFunction):
    """c * f(lam * x)."""

    def __init__(self, base: TestFunction, lam: float, c: float = 1.0):
        if not lam > 0:
            raise DomainError("dilation factor must be positive")
        self.base = base
        self.weight = base.weight
        self.lam, self.c = float(lam), float(c)

    @classmethod
    def mass_preserving(cls, base: TestFunction, lam: float, power: float) -> "Scaled":
        """lam^power * f(lam x); power = D/s keeps the L^s mass fixed."""
        return cls(base, lam, lam**power)

    @property
    def distributional_gradient(self):
        return getattr(self.base, "distributional_gradient", False)

    def value(self, x):
        x = _points(x, self.n)
        return self.c * self.base.value(self.lam * x)

    def grad(self, x):
        x = _points(x, self.n)
        return self.c * self.lam * self.base.grad(self.lam * x)

    def radial(self):
        form = self.base.radial()
        if form is None:
            return None
        c, lam = self.c, self.lam
        return RadialForm(
            rho=lambda r: c * form.rho(lam * r),
            drho=lambda r: c * lam * form.drho(lam * r),
            scale=form.scale / lam,
            support=None if form.support is None else form.support / lam,
            breakpoints=tuple(b / lam for b in form.breakpoints),
        )

    def factors(self):
        parts = self.base.factors()
        if parts is None:
            return None
        return [Scaled(f, self.lam, self.c if i == 0 else 1.0) for i, f in enumerate(parts)]

    def closed_form(self, need, region):
        inner = self.base.closed_form(need, region)
        if inner is None:
            return None
        D, c, lam, s = self.weight.D, self.c, self.lam, need.s
        if need.kind == "lp":
            return c**s * lam ** (-D) * inner
        if need.kind == "moment":
            return c**s * lam ** (-D - need.alpha) * inner
        if need.kind == "grad":
            return c**s * lam ** (s - D) * inner
        if need.kind == "ent":
            lp = self.base.closed_form(LP(s), region)
            if lp is None:
                return None
            return lam ** (-D) * (c**s * inner + c**s * math.log(c**s) * lp)
        return None

    def extent(self, tol):
        return self.base.extent(tol / max(abs(self.c), 1.0)) / self.lam

    @property
    def length_scale(self):
        return self.base.length_scale / self.lam

    def features(self):
        return [f / self.lam for f in self.base.features()]

    def describe(self):
        return {"family": "scaled", "lam": self.lam, "c": self.c, "base": self.base.describe()}


class TraceSlice(TestFunction):
    """x -> f(x, y0) for f on R^n x R; value and gradient in the first n coordinates."""

    def __init__(self, base: TestFunction, y0: float = 0.0):
        if base.n < 2:
            raise DomainError("a trace slice needs at least two coordinates")
        self.base = base
        self.y0 = float(y0)
        self.weight = Weight(base.weight.A[:-1])

    def _lift(self, x):
        x = _points(x, self.n)
        y = np.full(x.shape[:-1] + (1,), self.y0)
        return np.concatenate([x, y], axis=-1)

    def value(self, x):
        return self.base.value(self._lift(x))

    def grad(self, x):
        return self.base.grad(self._lift(x))[..., :-1]

    def extent(self, tol):
        return self.base.extent(tol)[:-1]

    @property
    def length_scale(self):
        return self.base.length_scale

    def features(self):
        return self.base.features()[:-1]

    def describe(self):
        return {"family": "trace_slice", "y0": self.y0, "base": self.base.describe()}


def trace_slice(f: TestFunction, y0: float = 0.0) -> TestFunction:
    """Restriction of f to the hyperplane y = y0 in its last coordinate.

    Centred Gaussians, Gaussians and tensor products with a one-dimensional
    last factor keep their structure; anything else is wrapped generically.
    """
    if isinstance(f, Gaussian) and f.n >= 2:
        cy = f.center[-1]
        amp = f.amplitude * math.exp(-((y0 - cy) ** 2) / (4.0 * f.sigma))
        return Gaussian(Weight(f.weight.A[:-1]), f.sigma, center=f.center[:-1], amplitude=amp)
    if isinstance(f, TensorProduct) and f.parts[-1].n == 1:
        h0 = float(f.parts[-1].value(np.array([[y0]]))[0])
        rest = f.parts[:-1]
        g = rest[0] if len(rest) == 1 else TensorProduct(rest)
        if h0 > 0:
            return g if h0 == 1.0 else Scaled(g, 1.0, h0)
    return TraceSlice(f, y0)


def _vec(v, n, name):
    arr = np.atleast_1d(np.asarray(v, dtype=float))
    if arr.size == 1 and n > 1:
        arr = np.full(n, float(arr[0]))
    if arr.size != n:
        raise DomainError(f"{name} needs {n} coordinates, got {arr.size}")
    return arr


def _gaussian(w, sigma=1.0, x0=None, amplitude=None):
    center = None if x0 is None else _vec(x0, w.n, "x0")
    return Gaussian(w, float(sigma), center=center, amplitude=amplitude)


def _indicator(w, R=1.0, amplitude=None, normalized=True):
    if amplitude is None and normalized:
        return Indicator.normalized(w, float(R))
    return Indicator(w, float(R), 1.0 if amplitude is None else float(amplitude))


def _bump(w, R=1.0, m=3, amplitude=1.0, x0=None):
    center = None if x0 is None else _vec(x0, w.n, "x0")
    return Bump(w, float(R), int(m), float(amplitude), center)


def _mixture(w, centers, sigmas, amps):
    return Mixture(w, centers, sigmas, amps)


FAMILIES: dict[str, Callable[..., TestFunction]] = {
    "gaussian": _gaussian,
    "extremal": lambda w, a=1.0, b=1.0, p=2.0: SobolevExtremal(w, float(a), float(b), float(p)),
    "exp_power": lambda w, alpha=2.0, t=1.0, amplitude=1.0: ExpPower(w, float(alpha), float(t), float(amplitude)),
    "phi_alpha": lambda w, alpha=2.0: phi_alpha(w, float(alpha)),
    "cauchy": lambda w, sigma=1.0, beta=2.0, amplitude=1.0: CauchyProfile(w, float(sigma), float(beta),
                                                                          float(amplitude)),
    "bump": _bump,
    "indicator": _indicator,
    "smoothed_indicator": lambda w, width=0.1, R=1.0, amplitude=1.0: smoothed_indicator(
        w, float(width), float(R), float(amplitude)),
    "mixture": _mixture,
}


def build_function(family: str, weight: Weight, **params) -> TestFunction:
    """Construct a test function by family name; parameters pass through as keywords."""
    try:
        make = FAMILIES[family]
    except KeyError:
        raise DomainError(f"unknown family {family!r}; choose from {sorted(FAMILIES)}") from None
    try:
        return make(weight, **params)
    except TypeError as exc:
        raise DomainError(f"bad parameters for family {family!r}: {exc}") from None

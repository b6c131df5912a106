"""Limit studies, deficit profiles and seeded violation hunting."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from . import checkers as chk
from .constants import asymptotic_limit, asymptotic_term, shannon_c_A
from .errors import DomainError, QuadratureAccuracyError
from .funcspace import (
    LP,
    MOMENT,
    Bump,
    Gaussian,
    Mixture,
    SobolevExtremal,
    TensorProduct,
    TestFunction,
    radial_bump_sum,
)
from .quad import DEFAULT_SPEC, Ball, QuadratureSpec, functionals_of, integrate_radial
from .special import Weight, ball_geometry

__all__ = [
    "SweepResult",
    "FuzzResult",
    "UniformInterval",
    "WeightedDensity",
    "asymptotic_scan",
    "pmean_limit",
    "deficit_profile",
    "gaussian_limit_diagnostic",
    "shannon_G",
    "shannon_lambda_opt",
    "random_function",
    "fuzz",
    "FUZZ_SUITES",
    "default_l_grid",
    "default_p_grid",
    "log_grid",
]


def default_l_grid() -> list[int]:
    return [2**j for j in range(2, 21)]


def default_p_grid() -> list[float]:
    return [10.0**-j for j in range(1, 5)]


def log_grid(lo: float, hi: float, num: int) -> list[float]:
    return [float(v) for v in np.geomspace(lo, hi, num)]


@dataclass
class SweepResult:
    name: str
    param: str
    grid: list
    values: list[float]
    errors: list[float]
    target: float | None = None
    columns: dict[str, list] = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    seed: int | None = None
    value_name: str = "value"

    def rows(self) -> list[dict]:
        out = []
        for i, g in enumerate(self.grid):
            row = {self.param: g, self.value_name: self.values[i], "error": self.errors[i]}
            for k, col in self.columns.items():
                row[k] = col[i]
            out.append(row)
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        rows = self.rows()
        fields = [self.param, self.value_name, "error", *self.columns]
        writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (json.dumps(v) if isinstance(v, (list, dict)) else repr(v) if isinstance(v, float)
                                 else v) for k, v in row.items()})
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "param": self.param,
            "target": self.target,
            "seed": self.seed,
            "value_name": self.value_name,
            "diagnostics": self.diagnostics,
            "rows": self.rows(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


# ---------------------------------------------------------------- dimensional limit


def asymptotic_scan(w: Weight, l_grid: Sequence[int] | None = None) -> SweepResult:
    """l C_{2,ln,B}^2 along l against its limit 2/(Pi(A) e D)."""
    grid = sorted(set(int(l) for l in (l_grid or default_l_grid())))
    if not grid:
        raise DomainError("empty l grid")
    target = asymptotic_limit(w)
    vals, errs, rel = [], [], []
    eps = np.finfo(float).eps
    for l in grid:
        t = asymptotic_term(w, l)
        lD = l * w.D
        # rounding in the log-gamma difference, magnified by the 2/lD exponent
        log_err = eps * (2.0 / lD) * (abs(math.lgamma(lD)) + abs(math.lgamma(lD / 2.0))) + 8 * eps
        vals.append(t)
        errs.append(t * log_err)
        rel.append(abs(t - target) / target)
    ratios = [rel[i + 1] / rel[i] if rel[i] > 0 else math.nan for i in range(len(rel) - 1)]
    tail = rel[len(rel) // 2:]
    monotone_tail = all(b < a for a, b in zip(tail, tail[1:]))
    first_mono = None
    for i in range(len(rel)):
        if all(b < a for a, b in zip(rel[i:], rel[i + 1:])):
            first_mono = grid[i]
            break
    return SweepResult(
        name="asymptotic_scan",
        param="l",
        grid=grid,
        values=vals,
        errors=errs,
        target=target,
        columns={"rel_error": rel},
        value_name="term",
        diagnostics={
            "weight": list(w.A),
            "final_rel_error": rel[-1],
            "error_ratios": ratios,
            "monotone_from": first_mono,
            "monotone_tail": monotone_tail,
        },
    )


# ---------------------------------------------------------------- p-means


@dataclass(frozen=True)
class UniformInterval:
    """Uniform probability on [a, b]."""

    a: float = 0.0
    b: float = 1.0


@dataclass(frozen=True)
class WeightedDensity:
    """d mu = |f|^s x^A dx / int |f|^s x^A dx on the cone of f's weight."""

    f: TestFunction
    s: float = 2.0


def _mean_of(h: Callable, mu, spec: QuadratureSpec) -> float:
    """int h d mu for a vectorised h of points."""
    if isinstance(mu, UniformInterval):
        v, _ = integrate.quad(lambda x: float(h(np.array([[x]]))[0]), mu.a, mu.b,
                              epsabs=spec.abs_tol, epsrel=spec.rel_tol, limit=spec.max_subdivisions)
        return v / (mu.b - mu.a)
    if isinstance(mu, WeightedDensity):
        f = mu.f
        mass = functionals_of(f, [LP(mu.s)], spec)[LP(mu.s)]
        form = f.radial()
        if form is not None and getattr(h, "radial", None) is not None:
            hr = h.radial

            def prof(r):
                r = np.asarray(r, float)
                return np.abs(form.rho(r)) ** mu.s * hr(r)

            v, _ = integrate_radial(prof, f.weight, spec, support=form.support, scale=form.scale,
                                    breakpoints=form.breakpoints)
            return v / mass
        v, _ = _cubature_mean(f, mu.s, h, spec)
        return v / mass
    raise DomainError("unknown measure descriptor")


def _cubature_mean(f, s, h, spec):
    from .quad import _box_for, _composite

    w = f.weight
    box = _box_for(f, w, w.positive, spec)
    vals, errs, ok = _composite(lambda x: (np.abs(f.value(x)) ** s * h(x))[None, :], w, box, spec,
                                4.0 * f.length_scale, [tuple(b) for b in f.features()])
    return float(vals[0]), float(errs[0])


class _PointFn:
    """Wraps g as a function of points, keeping a radial shortcut when g has one."""

    def __init__(self, g, transform):
        self.transform = transform
        if isinstance(g, TestFunction):
            self._g = lambda x: np.abs(g.value(x))
            form = g.radial()
            self.radial = None if form is None else (lambda r: transform(np.abs(form.rho(r))))
        else:
            self._g = lambda x: np.abs(np.asarray(g(x[..., 0] if x.shape[-1] == 1 else x), float))
            self.radial = None

    def __call__(self, x):
        return self.transform(self._g(x))


def pmean_limit(g, mu, p_grid: Sequence[float] | None = None, spec: QuadratureSpec = DEFAULT_SPEC
                ) -> SweepResult:
    """(int |g|^p d mu)^(1/p) as p -> 0+ against exp(int log |g| d mu).

    Uses int |g|^p d mu = 1 + int expm1(p log|g|) d mu and log1p, so the small-p
    end keeps full relative precision.  A log-moment of -inf gives target 0.
    """
    grid = sorted((float(p) for p in (p_grid or default_p_grid())), reverse=True)
    if not all(p > 0 for p in grid):
        raise DomainError("p values must be positive")

    def safe_log(v):
        with np.errstate(divide="ignore"):
            return np.log(v)

    log_mean = _mean_of(_PointFn(g, safe_log), mu, spec)
    target = 0.0 if not math.isfinite(log_mean) else math.exp(log_mean)
    vals, errs = [], []
    for p in grid:
        I = _mean_of(_PointFn(g, lambda v, p=p: np.expm1(p * safe_log(v))), mu, spec)
        M = math.exp(math.log1p(I) / p) if I > -1.0 else 0.0
        vals.append(M)
        errs.append(abs(M - target))
    logs = [(math.log(p), math.log(e)) for p, e in zip(grid, errs) if e > 0]
    slope = float(np.polyfit(*zip(*logs), 1)[0]) if len(logs) >= 2 else math.nan
    return SweepResult(
        name="pmean_limit",
        param="p",
        grid=grid,
        values=vals,
        errors=errs,
        target=target,
        columns={"abs_error": errs},
        value_name="pmean",
        diagnostics={"log_mean": log_mean, "fitted_order": slope},
    )


# ---------------------------------------------------------------- deficit profiles


def deficit_profile(ineq: str, family: str, points: Sequence[dict], w: Weight,
                    spec: QuadratureSpec = DEFAULT_SPEC, **checker_kw) -> SweepResult:
    """Deficit of one checker across a parameter list of one extremal family.

    ``family="gaussian"``: points carry ``sigma`` and optional ``x0``; the
    Gaussian is normalized in L^2.  ``family="extremal"``: points carry
    ``a``, ``b``; ``p`` comes from ``checker_kw``.
    """
    if ineq not in chk.CHECKERS:
        raise DomainError(f"unknown inequality {ineq!r}")
    check = chk.CHECKERS[ineq]
    pts = [dict(pt) for pt in points]
    reports = []
    for pt in pts:
        if family == "gaussian":
            x0 = pt.get("x0")
            f = Gaussian(w, float(pt.get("sigma", 1.0)), center=x0)
        elif family == "extremal":
            f = SobolevExtremal(w, float(pt["a"]), float(pt["b"]), float(checker_kw.get("p", 2.0)))
        else:
            raise DomainError(f"deficit profiles cover 'gaussian' and 'extremal', not {family!r}")
        if ineq in ("sobolev", "whole_space", "lp_logsob"):
            reports.append(check(f, w, checker_kw.get("p", 2.0), spec))
        else:
            reports.append(check(f, w, spec=spec))
    deficits = [r.deficit for r in reports]
    scale = [abs(r.deficit) / max(abs(r.lhs), abs(r.rhs), 1e-300) for r in reports]
    zero = [i for i, r in enumerate(reports) if r.verdict == "equality"]
    diag = {
        "ineq": ineq,
        "family": family,
        "weight": list(w.A),
        "max_abs_deficit": max(abs(d) for d in deficits),
        "max_rel_deficit": max(scale),
        "zero_set": zero,
    }
    if family == "gaussian":
        offsets = [float(np.linalg.norm(pt.get("x0") or [0.0])) for pt in pts]
        at0 = [d for d, o in zip(deficits, offsets) if o == 0.0]
        off = [d for d, o in zip(deficits, offsets) if o > 0.0]
        diag["flat_in_x0"] = bool(off) and max(abs(d) for d in at0 + off) <= 1e-6 * max(
            1.0, max(abs(r.rhs) for r in reports))
        if at0 and off:
            diag["min_at_origin"] = min(at0) < min(off)
    return SweepResult(
        name="deficit_profile",
        param="point",
        grid=pts,
        values=deficits,
        errors=[r.error for r in reports],
        columns={"rel_deficit": scale, "verdict": [r.verdict for r in reports]},
        diagnostics=diag,
        value_name="deficit",
    )


def gaussian_limit_diagnostic(w: Weight, l_grid: Sequence[int] = (4, 16, 64), sigma: float = 1.0,
                              radius: float = 3.0, spec: QuadratureSpec = DEFAULT_SPEC) -> SweepResult:
    """L^2(B_radius^A) distance between one block of the tensorized p=2 extremal and its Gaussian limit.

    On R^{ln} with weight B = (A, ..., A) the extremal is
    (1 + b_l |z|^2)^(1 - lD/2); with b_l = 1/(2 sigma (lD - 2)) it tends to
    exp(-|z|^2/(4 sigma)).  The slice through one block, z = (x, 0, ..., 0),
    is compared with exp(-|x|^2/(4 sigma)), both equal to 1 at the origin.
    """
    grid = sorted(int(l) for l in l_grid)
    D = w.D
    vals, errs = [], []
    for l in grid:
        lD = l * D
        if not lD > 2:
            raise DomainError("need lD > 2")
        b = 1.0 / (2.0 * sigma * (lD - 2.0))
        e = 1.0 - lD / 2.0

        def sq(r, b=b, e=e):
            r = np.asarray(r, float)
            return ((1.0 + b * r * r) ** e - np.exp(-r * r / (4.0 * sigma))) ** 2

        v, err = integrate_radial(sq, w, spec, support=radius, scale=min(radius, math.sqrt(2 * sigma)))
        vals.append(math.sqrt(v))
        errs.append(err / (2.0 * math.sqrt(v)) if v > 0 else math.sqrt(err))
    mono = all(b < a for a, b in zip(vals, vals[1:]))
    return SweepResult(
        name="gaussian_limit",
        param="l",
        grid=grid,
        values=vals,
        errors=errs,
        target=0.0,
        value_name="l2_distance",
        diagnostics={"weight": list(w.A), "sigma": sigma, "radius": radius, "monotone": mono},
    )


# ---------------------------------------------------------------- Shannon optimisation


def shannon_G(lam: float, J: float, w: Weight, alpha: float) -> float:
    """G(lam) = C_A(alpha) J lam^(-alpha) + D log lam."""
    return shannon_c_A(w, alpha) * J * lam ** (-alpha) + w.D * math.log(lam)


def _unit_moment(f, w, alpha, spec):
    fl = functionals_of(f, [LP(1), MOMENT(1, alpha)], spec)
    return fl.moment(1, alpha) / fl.lp(1)


def shannon_lambda_opt(f: TestFunction, w: Weight | None = None, alpha: float = 2.0,
                       spec: QuadratureSpec = DEFAULT_SPEC) -> tuple[float, float]:
    """(lambda_*, G(lambda_*)) for the unit-mass rescaling of f."""
    w = f.weight if w is None else w
    J = _unit_moment(f, w, alpha, spec)
    D = w.D
    CA = shannon_c_A(w, alpha)
    lam = (alpha * CA * J / D) ** (1.0 / alpha)
    return lam, (D / alpha) * math.log(CA * alpha * math.e * J / D)


# ---------------------------------------------------------------- fuzzing


def _random_mixture(rng, w, max_terms=5):
    k = int(rng.integers(1, max_terms + 1))
    centers = rng.uniform(-2.0, 2.0, size=(k, w.n))
    sigmas = rng.uniform(0.3, 2.0, size=k)
    amps = rng.uniform(0.2, 2.0, size=k)
    return Mixture(w, centers, sigmas, amps)


def _random_bump_sum(rng, w, R_max=2.0):
    k = int(rng.integers(1, 4))
    radii = np.sort(rng.uniform(0.3 * R_max, R_max, size=k))
    orders = rng.integers(2, 5, size=k)
    amps = rng.uniform(0.2, 2.0, size=k)
    return radial_bump_sum(w, radii, orders, amps)


def _random_inner_bump(rng, w, radius=1.0):
    # off-centre bump kept inside the ball of the given radius
    R = float(rng.uniform(0.2, 0.6)) * radius
    room = radius - R
    c = rng.uniform(-1.0, 1.0, size=w.n)
    for i, pos in enumerate(w.positive):
        if pos:
            c[i] = abs(c[i])
    c *= rng.uniform(0.0, room) / max(np.linalg.norm(c), 1e-12)
    return Bump(w, R, int(rng.integers(2, 5)), float(rng.uniform(0.2, 2.0)), c)


def random_function(rng, w: Weight, kind: str = "cone") -> TestFunction:
    """One admissible random test function.

    ``cone``: Gaussian mixtures (three in four) or radial bump sums.
    ``ball``: functions supported in the unit ball.
    ``halfspace``: products of a mixture on w and a one-dimensional mixture.
    """
    if kind == "cone":
        if rng.random() < 0.75:
            return _random_mixture(rng, w)
        return _random_bump_sum(rng, w)
    if kind == "ball":
        if rng.random() < 0.5:
            return _random_bump_sum(rng, w, R_max=1.0)
        return _random_inner_bump(rng, w, 1.0)
    if kind == "halfspace":
        g = _random_mixture(rng, w, max_terms=3)
        h = _random_mixture(rng, Weight((0.0,)), max_terms=2)
        return TensorProduct([g, h])
    raise DomainError(f"unknown fuzz kind {kind!r}")


@dataclass
class FuzzResult:
    ineq: str
    weight: tuple[float, ...]
    seed: int
    trials: int
    params: dict
    reports: list

    @property
    def violations(self) -> list:
        return [r for r in self.reports if not r.ok]

    def summary(self) -> dict:
        margins = [r.rel_margin for r in self.reports]
        return {
            "ineq": self.ineq,
            "weight": list(self.weight),
            "seed": self.seed,
            "trials": self.trials,
            "params": self.params,
            "violations": len(self.violations),
            "unconverged": sum(1 for r in self.reports if not r.converged),
            "equalities": sum(1 for r in self.reports if r.verdict == "equality"),
            "min_rel_margin": min(margins) if margins else math.nan,
        }


# suite name -> (checker key, weight, function kind, checker keywords)
FUZZ_SUITES: dict[str, tuple[str, tuple[float, ...], str, dict]] = {
    "sobolev_p1": ("sobolev", (1.0, 1.0), "cone", {"p": 1.0}),
    "sobolev_p2": ("sobolev", (1.0, 1.0), "cone", {"p": 2.0}),
    "logsob": ("logsob", (1.0, 2.0), "cone", {}),
    "nash": ("nash", (0.0, 0.0), "cone", {}),
    "shannon_a1": ("shannon", (0.5, 1.0), "cone", {"alpha": 1.0}),
    "shannon_a2": ("shannon", (0.5, 1.0), "cone", {"alpha": 2.0}),
    "heisenberg": ("heisenberg", (1.0, 0.0), "cone", {}),
    "l1_logsob": ("l1_logsob", (1.0, 1.0), "cone", {}),
    "lp_logsob": ("lp_logsob", (1.0, 2.0), "cone", {"p": 2.5}),
    "whole_space": ("whole_space", (1.0, 0.5), "cone", {"p": 2.0}),
    "trace": ("trace", (1.0,), "halfspace", {"p": 2.0}),
    "refined": ("refined", (0.0, 0.0), "ball", {"q": 4.0, "C0": 10.0}),
    "tm_logsob": ("tm_logsob", (0.0, 0.0), "ball", {"q": 4.0, "C0": 10.0}),
}

FUZZ_SPEC = QuadratureSpec(rel_tol=1e-10, raise_on_failure=False)


def fuzz(ineq: str, w: Weight | Sequence[float] | None = None, trials: int = 100, seed: int = 42, *,
         kind: str | None = None, spec: QuadratureSpec | None = None, workers: int = 1, **kw) -> FuzzResult:
    """Run one checker on ``trials`` seeded random functions.

    ``ineq`` is a checker key or a suite name from :data:`FUZZ_SUITES`, whose
    weight, function kind and parameters serve as defaults.  Trial i draws
    from the i-th child of ``SeedSequence(seed)``, so results do not depend
    on ``workers``.
    """
    if trials < 1:
        raise DomainError("trials must be at least 1")
    if ineq in FUZZ_SUITES:
        key, w0, kind0, kw0 = FUZZ_SUITES[ineq]
        kw = {**kw0, **kw}
        w = w0 if w is None else w
        kind = kind or kind0
        ineq = key
    if ineq not in chk.CHECKERS:
        raise DomainError(f"unknown inequality {ineq!r}")
    if w is None:
        raise DomainError("a weight is required")
    w = w if isinstance(w, Weight) else Weight(tuple(w))
    if kind is None:
        kind = {"trace": "halfspace", "refined": "ball", "tm_logsob": "ball"}.get(ineq, "cone")
    spec = spec or FUZZ_SPEC
    children = np.random.SeedSequence(seed).spawn(trials)

    def one(child):
        rng = np.random.default_rng(child)
        f = random_function(rng, w, kind)
        try:
            return chk.run_check(ineq, f, w, spec, **kw)
        except QuadratureAccuracyError as exc:
            raise QuadratureAccuracyError(f"{exc} for {f.describe()}", exc.value, exc.error) from exc

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(one, children))
    else:
        reports = [one(c) for c in children]
    return FuzzResult(ineq, tuple(w.A), int(seed), int(trials), dict(kw), reports)


def ball_measure(w: Weight, radius: float = 1.0) -> float:
    return ball_geometry(w).measure * radius**w.D


# ---------------------------------------------------------------- identity suite

IDENTITIES = ("gauss_mass", "gauss_moment", "cauchy")


def identity_suite(cases: int = 100, seed: int = 0, spec: QuadratureSpec = DEFAULT_SPEC,
                   max_n: int = 3) -> list[dict]:
    """Quadrature against the closed-form mass, moment and Cauchy integrals.

    Each case draws n <= max_n, A_i in [0, 4] and one identity.  With
    alpha = 2 the exponential integrals are computed as products of 1-D
    integrals, otherwise as radial integrals; closed forms are never used
    on the quadrature side.
    """
    from .funcspace import cauchy_integral, gaussian_moment
    from .quad import integrate_line

    rows = []
    for i, child in enumerate(np.random.SeedSequence(seed).spawn(cases)):
        rng = np.random.default_rng(child)
        n = int(rng.integers(1, max_n + 1))
        w = Weight(tuple(float(a) for a in rng.uniform(0.0, 4.0, size=n)))
        kind = IDENTITIES[int(rng.integers(len(IDENTITIES)))]
        D = w.D
        if kind == "cauchy":
            sigma = float(rng.uniform(0.25, 4.0))
            beta = D / 2.0 + float(rng.uniform(0.5, 3.0))
            params = {"sigma": sigma, "beta": beta}
            exact = cauchy_integral(w, sigma, beta)
            got, err = integrate_radial(lambda r: (1.0 + sigma * r * r) ** -beta, w, spec,
                                        scale=1.0 / math.sqrt(sigma))
        else:
            alpha = 2.0 if rng.random() < 0.5 else float(rng.uniform(0.5, 4.0))
            t = float(rng.uniform(0.25, 4.0))
            params = {"alpha": alpha, "t": t}
            mass, mom = gaussian_moment(w, alpha, t)
            beta = 0.0 if kind == "gauss_mass" else alpha
            exact = mass if kind == "gauss_mass" else mom
            if alpha == 2.0:
                # e^{-t|x|^2} |x|^{2 j} factorises coordinate by coordinate
                lines = []
                for a in w.A:
                    v0, e0, _ = integrate_line(lambda x: np.exp(-t * x * x), a, 0.0, math.inf, spec)
                    v2, e2, _ = integrate_line(lambda x: x * x * np.exp(-t * x * x), a, 0.0, math.inf, spec)
                    lines.append((v0, e0, v2, e2))
                if beta == 0.0:
                    got = float(np.prod([ln[0] for ln in lines]))
                    err = got * sum(ln[1] / ln[0] for ln in lines)
                else:
                    got = math.fsum(lines[j][2] * np.prod([ln[0] for k, ln in enumerate(lines) if k != j])
                                    for j in range(n))
                    err = got * sum(ln[1] / ln[0] + ln[3] / ln[2] for ln in lines)
            else:
                got, err = integrate_radial(lambda r: r**beta * np.exp(-t * r**alpha), w, spec,
                                            scale=t ** (-1.0 / alpha))
        rel = abs(got - exact) / abs(exact)
        rows.append({"case": i, "identity": kind, "A": list(w.A), "params": params, "exact": exact,
                     "quadrature": got, "error": err, "rel_error": rel})
    return rows

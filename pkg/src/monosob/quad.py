"""Weighted integration on monomial cones.

Three routes, chosen by the structure of the integrand:

* radial: ``P(B_1^A) * int_0^inf g(r) r^(D-1) dr``.  The algebraic factor at
  the origin is absorbed exactly by QUADPACK's algebraic-weight rule (QAWS);
  the tail runs through the infinite-range rule (QAGI).
* separable: products of one-dimensional weighted integrals, each adaptive.
* cubature: tensor composite Gauss rules on a truncated box, Gauss-Jacobi on
  the panels touching a weighted coordinate hyperplane, refined by panel
  halving until two levels agree.  Balls go through nested adaptive QUADPACK.
"""

from __future__ import annotations

import math
import os
import warnings
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import integrate
from scipy.special import roots_jacobi, roots_legendre

from .errors import DivergenceError, DomainError, QuadratureAccuracyError, UnsupportedDimensionError
from .funcspace import Need, TestFunction, region_factor
from .special import Weight, ball_geometry

__all__ = [
    "QuadratureSpec",
    "Functionals",
    "Box",
    "Ball",
    "integrate_radial",
    "integrate_line",
    "integrate_separable",
    "integrate_cubature",
    "functionals_of",
]

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    # None: truncate from the integrand's declared decay; a float fixes the box half-width
    truncation: float | None = None
    max_subdivisions: int = 200
    cubature_dim_cap: int = 3
    max_levels: int = 3
    nodes_per_panel: int = 20
    raise_on_failure: bool = True
    # False forces quadrature everywhere except distributional gradients
    closed_forms: bool = True

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise DomainError("rel_tol must be positive")
        if not self.abs_tol >= 0:
            raise DomainError("abs_tol must be nonnegative")

    @classmethod
    def from_env(cls, **overrides) -> "QuadratureSpec":
        """Default spec with ``MONOSOB_TOL`` overriding rel_tol."""
        env = os.environ.get("MONOSOB_TOL")
        if env and "rel_tol" not in overrides:
            overrides["rel_tol"] = float(env)
        return cls(**overrides)

    def with_(self, **changes) -> "QuadratureSpec":
        return replace(self, **changes)

    def tolerance(self, value: float) -> float:
        return max(self.rel_tol * abs(value), self.abs_tol)


DEFAULT_SPEC = QuadratureSpec()


@dataclass(frozen=True)
class Box:
    lo: tuple[float, ...]
    hi: tuple[float, ...]


@dataclass(frozen=True)
class Ball:
    radius: float = 1.0


def _finish(value, err, ok, spec, what):
    if not ok or err > spec.tolerance(value):
        if spec.raise_on_failure:
            raise QuadratureAccuracyError(
                f"{what}: estimate {value:.6g} with error {err:.3g} misses tolerance", value, err
            )
        return value, err, False
    return value, err, True


def _quad(fn, a, b, spec, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        res = integrate.quad(
            # pieces are summed, so each asks for a tenth of the budget
            fn, a, b, epsabs=0.1 * spec.abs_tol, epsrel=max(0.1 * spec.rel_tol, 50 * _EPS),
            limit=spec.max_subdivisions,
            full_output=1, **kw
        )
    value, err = res[0], res[1]
    ier = 0
    if len(res) > 3:
        ier = 1  # QUADPACK attached a message: some failure flag was raised
    if not np.isfinite(value):
        raise DivergenceError(f"integral on [{a}, {b}] is not finite")
    return float(value), float(abs(err)), ier == 0


def _check_tail(g, a_exp, cut):
    """Refuse tails that do not decay in the logarithmic variable."""
    def log_h(r):
        with np.errstate(all="ignore"):
            v = abs(float(g(np.float64(r))))
        return math.log(v) + (a_exp + 1.0) * math.log(r) if v > 0 else -math.inf

    near, far = log_h(cut), log_h(cut * 1e100)
    if math.isfinite(near) and not far < near:
        raise DivergenceError(f"integrand r^{a_exp + 1:g} g(r) does not decay beyond r={cut:.3g}")


def _half_line(g, a_exp, b, scale, points, spec):
    """int_0^b g(t) t^a_exp dt with b possibly infinite."""
    if b <= 0:
        return 0.0, 0.0, True
    pts = sorted(p for p in points if 0 < p < b)
    s0 = min(scale, b)
    if pts:
        s0 = min(s0, pts[0])
    total = err = 0.0
    ok = True

    if a_exp > 0:
        v, e, o = _quad(g, 0.0, s0, spec, weight="alg", wvar=(a_exp, 0.0))
    else:
        v, e, o = _quad(g, 0.0, s0, spec)
    total, err, ok = total + v, err + e, ok and o

    def plain(t):
        return g(t) * t**a_exp

    pts = [p for p in pts if p > s0]
    cut = b if math.isfinite(b) else max([s0] + pts) + 3.0 * scale
    if cut > s0:
        inner = [p for p in pts if p < cut]
        v, e, o = _quad(plain, s0, cut, spec, points=inner or None)
        total, err, ok = total + v, err + e, ok and o
    if not math.isfinite(b):
        _check_tail(g, a_exp, cut)

        # r = cut * e^u turns algebraic tails into exponential ones
        def logsub(u):
            r = cut * math.exp(min(u, 700.0))
            if not math.isfinite(r):
                return 0.0
            with np.errstate(all="ignore"):
                val = g(np.float64(r)) * np.float64(r) ** (a_exp + 1.0)
            return float(val) if np.isfinite(val) else 0.0

        v, e, o = _quad(logsub, 0.0, math.inf, spec)
        total, err, ok = total + v, err + e, ok and o
    return total, err, ok


def integrate_line(fn, a_exp: float, lo: float, hi: float, spec: QuadratureSpec = DEFAULT_SPEC, *,
                   scale: float = 1.0, points: Iterable[float] = ()):
    """int_lo^hi fn(t) |t|^a_exp dt.  Returns (value, err, converged)."""
    points = list(points)
    total = err = 0.0
    ok = True
    if hi > 0:
        v, e, o = _half_line(fn, a_exp, hi, scale, [p for p in points if p > 0], spec)
        if lo > 0:
            v2, e2, o2 = _half_line(fn, a_exp, lo, scale, [p for p in points if p > 0], spec)
            v, e, o = v - v2, e + e2, o and o2
        total, err, ok = total + v, err + e, ok and o
    if lo < 0:
        v, e, o = _half_line(lambda t: fn(-t), a_exp, -lo, scale, [-p for p in points if p < 0], spec)
        if hi < 0:
            v2, e2, o2 = _half_line(lambda t: fn(-t), a_exp, -hi, scale, [-p for p in points if p < 0], spec)
            v, e, o = v - v2, e + e2, o and o2
        total, err, ok = total + v, err + e, ok and o
    return total, err, ok


def integrate_radial(profile: Callable, w: Weight, spec: QuadratureSpec = DEFAULT_SPEC, *,
                     support: float | None = None, scale: float = 1.0,
                     breakpoints: Sequence[float] = ()) -> tuple[float, float]:
    """P(B_1^A) * int_0^inf profile(r) r^(D-1) dr, the cone integral of a radial function."""
    v, e, _ = _radial(profile, w, spec, support=support, scale=scale, breakpoints=breakpoints)
    return v, e


def _radial(profile, w, spec, *, support=None, scale=1.0, breakpoints=()):
    P = ball_geometry(w).perimeter
    b = math.inf if support is None else float(support)
    v, e, ok = _half_line(profile, w.D - 1.0, b, scale, list(breakpoints), spec)
    v, e = P * v, P * e
    return _finish(v, e, ok, spec, "radial integral")


def integrate_separable(factors: Sequence[Callable], w: Weight, spec: QuadratureSpec = DEFAULT_SPEC,
                        region: Sequence[bool] | None = None) -> tuple[float, float]:
    """prod_i int |g_i(t)| |t|^A_i dt, over t > 0 where the region asks for it."""
    if len(factors) != w.n:
        raise DomainError("need one factor per coordinate")
    region = w.positive if region is None else tuple(region)
    vals, errs = [], []
    ok = True
    for g, a, pos in zip(factors, w.A, region):
        lo = 0.0 if pos else -math.inf
        v, e, o = integrate_line(lambda t, g=g: abs(g(t)), a, lo, math.inf, spec)
        vals.append(v)
        errs.append(e)
        ok = ok and o
    value = float(np.prod(vals))
    err = abs(value) * sum(e / abs(v) for v, e in zip(vals, errs) if v != 0)
    v, e, _ = _finish(value, err, ok, spec, "separable integral")
    return v, e


# ---------------------------------------------------------------- cubature


@lru_cache(maxsize=64)
def _legendre(m):
    return roots_legendre(m)


@lru_cache(maxsize=256)
def _jacobi(m, a):
    # weight (1 + t)^a on [-1, 1]
    return roots_jacobi(m, 0.0, a)


def _panel_edges(left, right, h, grow):
    """Panels of width h near both ends, widening linearly with the distance beyond ``grow``.

    Widths scale with h, so halving h refines every panel; long intervals
    (algebraic tails) then cost O(log length) panels instead of O(length).
    """
    length = right - left
    if grow is None or length <= 4.0 * grow:
        k = max(1, int(math.ceil(length / h - 1e-9)))
        return np.linspace(left, right, k + 1)
    half = length / 2.0
    steps = [0.0]
    d = 0.0
    while d < half:
        d += h * max(1.0, d / grow)
        steps.append(min(d, half))
    steps = np.asarray(steps)
    if steps[-1] - steps[-2] < 0.25 * h and len(steps) > 2:
        steps = np.delete(steps, -2)
    return np.concatenate([left + steps, (right - steps[-2::-1])])


def _axis_rule(lo, hi, a_exp, h, m, breaks=(), grow=None):
    """Composite nodes/weights for int_lo^hi g(x) |x|^a_exp dx."""
    cuts = {lo, hi}
    if lo < 0 < hi:
        cuts.add(0.0)
    smooth_weight = float(a_exp).is_integer()
    for b in breaks:
        # a cut just off the origin would put the |x|^a branch point next to a Legendre panel
        if lo < b < hi and (smooth_weight or b == 0.0 or abs(b) >= h / 4.0):
            cuts.add(float(b))
    cuts = sorted(cuts)
    tg, wg = _legendre(m)
    nodes, weights = [], []
    for left, right in zip(cuts[:-1], cuts[1:]):
        edges = _panel_edges(left, right, h, grow)
        for pl, pr in zip(edges[:-1], edges[1:]):
            width = pr - pl
            if a_exp > 0 and (pl == 0.0 or pr == 0.0):
                tj, wj = _jacobi(m, a_exp)
                x = (pr + pl) / 2.0 + (width / 2.0) * (tj if pl == 0.0 else -tj)
                nodes.append(x)
                weights.append(wj * (width / 2.0) ** (a_exp + 1.0))
            else:
                x = (pr + pl) / 2.0 + (width / 2.0) * tg
                nodes.append(x)
                weights.append(wg * (width / 2.0) * np.abs(x) ** a_exp)
    return np.concatenate(nodes), np.concatenate(weights)


def _tensor_sum(fn, axes, chunk=250_000):
    """sum over the tensor grid of prod(w) * fn(points); fn returns (K, M)."""
    xs = [a[0] for a in axes]
    ws = [a[1] for a in axes]
    n = len(axes)
    tail_size = int(np.prod([len(x) for x in xs[1:]])) if n > 1 else 1
    if n > 1:
        mesh = np.meshgrid(*xs[1:], indexing="ij")
        tail_pts = np.stack([g.ravel() for g in mesh], axis=-1)
        tail_w = np.ones(tail_size)
        for wv in np.meshgrid(*ws[1:], indexing="ij"):
            tail_w = tail_w * wv.ravel()
    block = max(1, chunk // tail_size)
    total = None
    total_abs = None
    for start in range(0, len(xs[0]), block):
        x0 = xs[0][start:start + block]
        w0 = ws[0][start:start + block]
        if n > 1:
            pts = np.concatenate(
                [np.repeat(x0, tail_size)[:, None], np.tile(tail_pts, (len(x0), 1))], axis=1
            )
            wt = np.repeat(w0, tail_size) * np.tile(tail_w, len(x0))
        else:
            pts = x0[:, None]
            wt = w0
        vals = np.atleast_2d(fn(pts))
        s = vals @ wt
        sa = np.abs(vals) @ np.abs(wt)
        total = s if total is None else total + s
        total_abs = sa if total_abs is None else total_abs + sa
    return total, total_abs


def _box_for(f, w, region, spec):
    n = w.n
    if spec.truncation is not None:
        box = np.array([[-spec.truncation, spec.truncation]] * n, dtype=float)
    elif isinstance(f, TestFunction):
        box = np.array(f.extent(spec.abs_tol), dtype=float)
    else:
        raise DomainError("plain integrands need a Box domain or spec.truncation")
    for i, pos in enumerate(region):
        if pos:
            box[i, 0] = max(box[i, 0], 0.0)
    return box


def _composite(fn, w, box, spec, h0, breaks):
    """Tensor Gauss sums with per-row error estimates.

    Each level pairs the m-point rule with a lower-order one on the same
    panels; a row is accepted when the pair agrees, or when it agrees with
    the previous, coarser level.  Panels are halved between levels and
    every row keeps the value of the level at which it first converged.
    Returns (values, errors, converged) with one entry per row.
    """
    m = spec.nodes_per_panel
    m_lo = max(4, int(math.ceil(0.7 * m)))
    grow = 2.0 * h0
    prev = prev_diff = None
    vals = errs = done = None
    for level in range(spec.max_levels):
        h = h0 / 2.0**level
        axes = [_axis_rule(box[i, 0], box[i, 1], w.A[i], h, m, breaks[i], grow) for i in range(w.n)]
        cur, cur_abs = _tensor_sum(fn, axes)
        if vals is None:
            vals = cur.copy()
            errs = np.full(cur.shape, math.inf)
            done = np.zeros(cur.shape, dtype=bool)
        floor = 16.0 * _EPS * cur_abs
        target = np.maximum(spec.rel_tol * np.abs(cur), spec.abs_tol)
        axes_lo = [_axis_rule(box[i, 0], box[i, 1], w.A[i], h, m_lo, breaks[i], grow) for i in range(w.n)]
        lo, _ = _tensor_sum(fn, axes_lo)
        est = np.abs(cur - lo) + floor
        if prev is not None:
            diff = np.abs(cur - prev)
            est = np.minimum(est, diff + floor)
            if prev_diff is not None:
                # geometric convergence across levels: the next step is about diff^2/prev_diff
                fast = diff < 0.5 * prev_diff
                ratio = np.divide(diff * diff, prev_diff, out=np.full(diff.shape, math.inf), where=prev_diff > 0)
                est = np.where(fast, np.minimum(est, 2.0 * ratio + floor), est)
            prev_diff = diff
        fresh = ~done
        vals[fresh] = cur[fresh]
        errs[fresh] = est[fresh]
        done |= est <= target
        if np.all(done):
            break
        prev = cur
    return vals, errs, done


def _ball_nquad(fn, w, radius, spec):
    n = w.n
    A = w.A
    pos = w.positive

    def scalar(*xs):
        pt = np.array(xs, dtype=float)[None, :]
        return float(np.atleast_1d(fn(pt))[0])

    ranges = []
    opts = []
    for i in range(n):
        def rng(*later, i=i):
            rem = radius**2 - sum(t * t for t in later)
            u = math.sqrt(max(rem, 0.0))
            return (0.0 if pos[i] else -u, u)

        ranges.append(rng)
        o = {"epsabs": spec.abs_tol, "epsrel": spec.rel_tol, "limit": spec.max_subdivisions}
        if pos[i]:
            o.update(weight="alg", wvar=(A[i], 0.0))
        opts.append(o)

    def integrand(*xs):
        weight = 1.0
        for i, x in enumerate(xs):
            if not pos[i] and A[i] > 0:
                weight *= abs(x) ** A[i]
        return scalar(*xs) * weight

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, err = integrate.nquad(integrand, ranges, opts=opts)
    return float(value), float(abs(err)), True


def integrate_cubature(f, w: Weight, domain=None, spec: QuadratureSpec = DEFAULT_SPEC,
                       region: Sequence[bool] | None = None):
    """int f(x) x^A dx over ``domain`` intersected with the region.

    ``f`` maps points of shape (M, n) to (M,) or (K, M) values; with several
    rows every row is integrated on the same nodes and arrays come back.
    ``domain`` is a :class:`Box`, a :class:`Ball` (centred, inside the cone) or
    ``None`` for the whole region, truncated where ``f`` (a TestFunction)
    declares its decay negligible.
    """
    if w.n > spec.cubature_dim_cap:
        raise UnsupportedDimensionError(
            f"generic cubature is capped at n={spec.cubature_dim_cap}, got n={w.n}"
        )
    region = w.positive if region is None else tuple(region)
    if isinstance(domain, Ball):
        v, e, ok = _ball_nquad(f, w, domain.radius, spec)
        v, e, _ = _finish(v, e, ok, spec, "ball cubature")
        return v, e
    if isinstance(domain, Box):
        box = np.array([domain.lo, domain.hi], dtype=float).T
        for i, pos in enumerate(region):
            if pos:
                box[i, 0] = max(box[i, 0], 0.0)
        h0 = float(np.max(box[:, 1] - box[:, 0])) / 2.0
        breaks = [()] * w.n
    else:
        box = _box_for(f, w, region, spec)
        h0 = 4.0 * getattr(f, "length_scale", 1.0)
        breaks = [tuple(b) for b in f.features()] if isinstance(f, TestFunction) else [()] * w.n
    fn = f.value if isinstance(f, TestFunction) else f
    vals, errs, ok = _composite(fn, w, box, spec, h0, breaks)
    if len(vals) == 1:
        v, e, _ = _finish(float(vals[0]), float(errs[0]), bool(ok[0]), spec, "cubature")
        return v, e
    if not np.all(ok) and spec.raise_on_failure:
        raise QuadratureAccuracyError("cubature missed tolerance", vals, errs)
    return vals, errs


# ---------------------------------------------------------------- functionals


@dataclass
class Functionals:
    """Weighted functionals of one function, each with an error estimate."""

    values: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)
    converged: bool = True

    def get(self, need: Need) -> tuple[float, float]:
        return self.values[need], self.errors[need]

    def __getitem__(self, need: Need) -> float:
        return self.values[need]

    def err(self, need: Need) -> float:
        return self.errors[need]

    def lp(self, s) -> float:
        return self.values[Need("lp", float(s))]

    def norm(self, s) -> float:
        return self.lp(s) ** (1.0 / s)

    def grad_lp(self, s) -> float:
        return self.values[Need("grad", float(s))]

    def entropy(self, s) -> float:
        return self.values[Need("ent", float(s))]

    def moment(self, s, alpha) -> float:
        return self.values[Need("moment", float(s), float(alpha))]

    def scaled(self, c: float) -> "Functionals":
        """Functionals of c*f from those of f (c > 0)."""
        if not c > 0:
            raise DomainError("scale factor must be positive")
        vals, errs = {}, {}
        for need, v in self.values.items():
            e = self.errors[need]
            cs = c**need.s
            if need.kind == "ent":
                lp_key = Need("lp", need.s)
                if lp_key not in self.values:
                    raise DomainError("rescaling an entropy needs the matching L^s mass")
                shift = cs * math.log(cs)
                vals[need] = cs * v + shift * self.values[lp_key]
                errs[need] = cs * e + abs(shift) * self.errors[lp_key]
            else:
                vals[need] = cs * v
                errs[need] = cs * e
        return Functionals(vals, errs, self.converged)

    def as_dict(self) -> dict:
        out = {}
        for need, v in self.values.items():
            key = f"{need.kind}({need.s:g}" + (f",{need.alpha:g})" if need.kind == "moment" else ")")
            out[key] = {"value": v, "error": self.errors[need]}
        return out


def _pointwise(need: Need, v, g, r):
    """Integrand values for one need from |f|, |grad f| and |x|."""
    s = need.s
    if need.kind == "lp":
        return v**s
    if need.kind == "grad":
        return g**s
    if need.kind == "moment":
        return v**s * r**need.alpha
    if need.kind == "ent":
        out = np.zeros_like(v)
        pos = v > 0
        vp = v[pos]
        out[pos] = vp**s * (s * np.log(vp))
        return out
    raise DomainError(f"unknown functional {need.kind}")


def _closed_err(v):
    return 8.0 * _EPS * abs(v)


def _check_integrable(f, need, region):
    # families raise DivergenceError from closed_form for known-infinite requests
    f.closed_form(need, region)


ROUTES = ("auto", "cubature")


def functionals_of(f: TestFunction, needs: Iterable[Need], spec: QuadratureSpec = DEFAULT_SPEC,
                   region: Sequence[bool] | None = None, use_closed_forms: bool = True,
                   route: str = "auto") -> Functionals:
    """Compute the requested functionals, by closed form where known, else quadrature.

    ``route="cubature"`` skips every structural shortcut and integrates on
    the full tensor grid; it serves as an independent cross-check.
    """
    if route not in ROUTES:
        raise DomainError(f"route must be one of {ROUTES}, got {route!r}")
    needs = list(dict.fromkeys(needs))
    region = f.weight.positive if region is None else tuple(region)
    if len(region) != f.n:
        raise DomainError("region length must match the weight dimension")
    out = Functionals()
    if route == "cubature":
        _cubature_functionals(f, needs, spec, region, out)
        return out
    use_closed_forms = use_closed_forms and spec.closed_forms
    todo = []
    for need in needs:
        forced = need.kind == "grad" and getattr(f, "distributional_gradient", False)
        cf = f.closed_form(need, region) if (use_closed_forms or forced) else None
        if cf is None and not use_closed_forms:
            _check_integrable(f, need, region)
        if cf is not None:
            out.values[need] = float(cf)
            out.errors[need] = _closed_err(cf)
        else:
            todo.append(need)
    if not todo:
        return out

    form = f.radial()
    if form is not None:
        fac = region_factor(f.weight, region)
        for need in todo:
            def prof(r, need=need):
                r = np.asarray(r, dtype=float)
                return _pointwise(need, np.abs(form.rho(r)), np.abs(form.drho(r)), r)

            v, e, ok = _radial(prof, f.weight, spec, support=form.support, scale=form.scale,
                               breakpoints=form.breakpoints)
            out.values[need], out.errors[need] = fac * v, fac * e
            out.converged &= ok
        return out

    parts = f.factors()
    if parts is not None:
        separable = [nd for nd in todo if _separable_need(nd)]
        rest = [nd for nd in todo if not _separable_need(nd)]
        if separable:
            _separable_functionals(parts, separable, spec, region, use_closed_forms, out)
        todo = rest
        if not todo:
            return out

    if f.n == 1:
        _line_functionals(f, todo, spec, region, out)
        return out
    _cubature_functionals(f, todo, spec, region, out)
    return out


def _separable_need(need):
    if need.kind in ("lp", "ent"):
        return True
    if need.kind == "grad":
        return need.s == 2.0
    if need.kind == "moment":
        return need.alpha in (0.0, 2.0)
    return False


def _separable_functionals(parts, needs, spec, region, use_cf, out):
    sub_needs = set()
    for nd in needs:
        sub_needs.add(Need("lp", nd.s))
        if nd.kind == "ent":
            sub_needs.add(nd)
        elif nd.kind == "grad":
            sub_needs.add(nd)
        elif nd.kind == "moment" and nd.alpha == 2.0:
            sub_needs.add(nd)
    per = []
    start = 0
    for f in parts:
        sub_region = region[start:start + f.n]
        start += f.n
        per.append(functionals_of(f, sub_needs, spec, sub_region, use_cf))
    for fl in per:
        out.converged &= fl.converged

    for nd in needs:
        if nd.kind == "lp" or (nd.kind == "moment" and nd.alpha == 0.0):
            key = Need("lp", nd.s)
            vals = [fl.values[key] for fl in per]
            errs = [fl.errors[key] for fl in per]
            v = float(np.prod(vals))
            e = abs(v) * sum(er / abs(va) for va, er in zip(vals, errs) if va != 0)
        else:
            # sum_i X_i prod_{j != i} lp_j(s), X the per-factor entropy, energy or moment
            key_lp = Need("lp", 2.0) if nd.kind == "grad" else Need("lp", nd.s)
            lps = [fl.values[key_lp] for fl in per]
            lpe = [fl.errors[key_lp] for fl in per]
            v = 0.0
            e = 0.0
            for i, fl in enumerate(per):
                others = float(np.prod([lps[j] for j in range(len(per)) if j != i]))
                xi, xe = fl.values[nd], fl.errors[nd]
                v += xi * others
                rel_others = sum(lpe[j] / abs(lps[j]) for j in range(len(per)) if j != i and lps[j] != 0)
                e += xe * abs(others) + abs(xi * others) * rel_others
        out.values[nd], out.errors[nd] = v, e


def _line_functionals(f, needs, spec, region, out):
    box = f.extent(spec.abs_tol)
    lo, hi = float(box[0, 0]), float(box[0, 1])
    if region[0]:
        lo = max(lo, 0.0)
    a = f.weight.A[0]
    pts = [float(p) for p in f.features()[0]]
    for need in needs:
        def g(t, need=need):
            x = np.array([[t]], dtype=float)
            v = np.abs(f.value(x))
            gr = np.abs(f.grad(x))[..., 0]
            return float(_pointwise(need, v, gr, np.abs(x[..., 0]))[0])

        v, e, ok = integrate_line(g, a, lo, hi, spec, scale=f.length_scale, points=pts)
        v, e, ok = _finish(v, e, ok, spec, f"line integral of {need}")
        out.values[need], out.errors[need] = v, e
        out.converged &= ok


def _cubature_functionals(f, needs, spec, region, out):
    def stack(pts):
        v = np.abs(f.value(pts))
        need_grad = any(nd.kind == "grad" for nd in needs)
        g = np.sqrt(np.sum(f.grad(pts) ** 2, axis=-1)) if need_grad else None
        r = np.sqrt(np.sum(pts * pts, axis=-1))
        return np.stack([_pointwise(nd, v, g, r) for nd in needs])

    w = f.weight
    if w.n > spec.cubature_dim_cap:
        raise UnsupportedDimensionError(
            f"no radial or separable structure and n={w.n} exceeds the cubature cap"
        )
    box = _box_for(f, w, region, spec)
    h0 = 4.0 * f.length_scale
    breaks = [tuple(b) for b in f.features()]
    alphas = [nd.alpha for nd in needs if nd.kind == "moment" and nd.alpha % 2.0 != 0.0]
    if alphas:
        # |x|^alpha is not smooth at the origin; grade the panels towards it
        # until the corner cell is below tolerance
        delta = (100.0 * spec.rel_tol) ** (1.0 / (w.D + min(alphas)))
        levels = max(1, int(math.ceil(math.log2(h0 / delta))))
        grade = [h0 * 2.0**-j for j in range(1, levels + 1)]
        breaks = [b + tuple(grade) + tuple(-g for g in grade) for b in breaks]
    vals, errs, ok = _composite(stack, w, box, spec, h0, breaks)
    for i, nd in enumerate(needs):
        v, e, o = _finish(float(vals[i]), float(errs[i]), bool(ok[i]), spec, f"cubature of {nd}")
        out.values[nd], out.errors[nd] = v, e
        out.converged &= o

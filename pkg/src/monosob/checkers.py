"""Both sides, deficit and verdict of each weighted functional inequality.

Sides are reported on the scale each inequality is naturally written in
(log scale for the entropy forms, linear for norms and products).  The error
field is a first-order propagation of the quadrature error estimates.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import constants as K
from .errors import DomainError
from .funcspace import ENT, GRAD, LP, MOMENT, TestFunction, tensorize, trace_slice
from .quad import DEFAULT_SPEC, Ball, Functionals, QuadratureSpec, functionals_of, integrate_radial
from .special import Weight, log_gamma, pi_A

__all__ = [
    "InequalityReport",
    "verdict_for",
    "check_sobolev",
    "check_logsob",
    "check_nash",
    "check_shannon",
    "check_l2_shannon",
    "check_heisenberg",
    "check_l1_logsob",
    "check_lp_logsob",
    "check_whole_space_sobolev",
    "check_trace",
    "check_refined_sobolev",
    "check_tm_logsob",
    "tensor_consistency",
    "check_gamma_exp_bound",
    "CHECKERS",
]

EQUALITY_REL = 1e-6
EQUALITY_ABS = 1e-8
VIOLATION_SLACK = 1e-9
NORMALIZATION_TOL = 1e-12


@dataclass
class InequalityReport:
    inequality: str
    weight: tuple[float, ...]
    function: dict
    lhs: float
    rhs: float
    deficit: float
    rel_margin: float
    error: float
    verdict: str
    params: dict = field(default_factory=dict)
    normalization: float = 1.0
    converged: bool = True
    extras: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.verdict != "violated-beyond-error"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["weight"] = list(self.weight)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, allow_nan=True)


def verdict_for(lhs: float, rhs: float, error: float) -> tuple[float, float, str]:
    """(deficit, relative margin, verdict) for lhs <= rhs."""
    deficit = rhs - lhs
    scale = max(abs(lhs), abs(rhs))
    rel = deficit / scale if scale > 0 else 0.0
    if deficit < -(error + VIOLATION_SLACK):
        v = "violated-beyond-error"
    elif abs(deficit) <= max(EQUALITY_REL * scale, EQUALITY_ABS):
        v = "equality"
    else:
        v = "holds"
    return deficit, rel, v


def _report(name, w, f, lhs, rhs, err, params, fl: Functionals | None = None, normalization=1.0,
            extras=None) -> InequalityReport:
    deficit, rel, verdict = verdict_for(lhs, rhs, err)
    return InequalityReport(
        inequality=name,
        weight=tuple(w.A),
        function=f.describe() if isinstance(f, TestFunction) else dict(f),
        lhs=float(lhs),
        rhs=float(rhs),
        deficit=float(deficit),
        rel_margin=float(rel),
        error=float(err),
        verdict=verdict,
        params=dict(params),
        normalization=float(normalization),
        converged=True if fl is None else bool(fl.converged),
        extras=dict(extras or {}),
    )


def _weight_of(f, w):
    if w is None:
        return f.weight
    if not isinstance(w, Weight):
        w = Weight(w)
    if w != f.weight:
        raise DomainError(f"function lives on {f.weight}, checker called with {w}")
    return w


def _functionals(f, needs, spec, region=None):
    return functionals_of(f, needs, spec or DEFAULT_SPEC, region)


def _normalized(fl: Functionals, s: float, normalize: bool) -> tuple[Functionals, float]:
    """Rescale to unit L^s mass; errors absorb the uncertainty of the factor."""
    mass, mass_err = fl.get(LP(s))
    if not mass > 0:
        raise DomainError("function vanishes identically")
    if abs(mass - 1.0) <= NORMALIZATION_TOL:
        return fl, 1.0
    if not normalize:
        raise DomainError(f"L^{s:g} mass is {mass:.15g}, not 1; pass normalize=True to rescale")
    c = mass ** (-1.0 / s)
    out = fl.scaled(c)
    # first order in the relative error r of the mass: dc/c = -r/s
    r = mass_err / mass
    for need in out.values:
        grow = abs(out.values[need])
        if need.kind == "ent":
            grow += abs(out.values[LP(need.s)])
        out.errors[need] += (need.s / s) * r * grow
    return out, c


def _rel(fl, need):
    v, e = fl.get(need)
    return e / abs(v) if v != 0 else math.inf


def _log_side(coef, values, fl, needs_exp):
    """coef * log(values) and its error; values = prod F_i^e_i times a constant."""
    rel = sum(abs(e) * _rel(fl, nd) for nd, e in needs_exp)
    return coef * math.log(values), abs(coef) * rel


# ---------------------------------------------------------------- Sobolev family


def check_sobolev(f: TestFunction, w=None, p: float = 2.0, spec: QuadratureSpec | None = None
                  ) -> InequalityReport:
    """||f||_{p*} <= C_{p,n,A} ||grad f||_p on the weighted cone."""
    w = _weight_of(f, w)
    ps = K.critical_exponent(w, p)
    C = K.sobolev_constant(w, p)
    fl = _functionals(f, [LP(ps), GRAD(p)], spec)
    lhs = fl.lp(ps) ** (1.0 / ps)
    g = fl.grad_lp(p)
    if not g > 0:
        raise DomainError("zero gradient energy: constants are not in the space")
    rhs = C * g ** (1.0 / p)
    err = lhs * _rel(fl, LP(ps)) / ps + rhs * _rel(fl, GRAD(p)) / p
    return _report("sobolev", w, f, lhs, rhs, err, {"p": p, "p_star": ps, "C": C}, fl)


def check_whole_space_sobolev(f: TestFunction, w=None, p: float = 2.0, spec: QuadratureSpec | None = None
                              ) -> InequalityReport:
    """||f||_{p*} <= K ||grad f||_p with every integral over all of R^n, weight |x_1|^A_1 ..."""
    w = _weight_of(f, w)
    ps = K.critical_exponent(w, p)
    Kc = K.whole_space_K(w, p)
    region = (False,) * w.n
    fl = _functionals(f, [LP(ps), GRAD(p)], spec, region)
    lhs = fl.lp(ps) ** (1.0 / ps)
    g = fl.grad_lp(p)
    if not g > 0:
        raise DomainError("zero gradient energy")
    grad_norm = g ** (1.0 / p)
    rhs = Kc * grad_norm
    err = lhs * _rel(fl, LP(ps)) / ps + rhs * _rel(fl, GRAD(p)) / p
    C = K.sobolev_constant(w, p)
    extras = {"one_octant_rhs": C * grad_norm, "one_octant_deficit": C * grad_norm - lhs}
    return _report("whole_space_sobolev", w, f, lhs, rhs, err, {"p": p, "p_star": ps, "K": Kc}, fl,
                   extras=extras)


# ---------------------------------------------------------------- entropy forms


def check_logsob(f: TestFunction, w=None, spec: QuadratureSpec | None = None, *, normalize: bool = True
                 ) -> InequalityReport:
    """int f^2 log f^2 <= (D/2) log(2/(Pi e D) int |grad f|^2), unit L^2 mass."""
    w = _weight_of(f, w)
    D = w.D
    fl, c = _normalized(_functionals(f, [LP(2), ENT(2), GRAD(2)], spec), 2.0, normalize)
    g = fl.grad_lp(2)
    if not g > 0:
        raise DomainError("zero gradient energy")
    lhs = fl.entropy(2)
    rhs, rhs_err = _log_side(D / 2.0, 2.0 / (pi_A(w) * math.e * D) * g, fl, [(GRAD(2), 1.0)])
    err = fl.err(ENT(2)) + rhs_err
    return _report("logsob", w, f, lhs, rhs, err, {}, fl, c)


def check_nash(f: TestFunction, w=None, spec: QuadratureSpec | None = None) -> InequalityReport:
    """(int f^2)^(1+2/D) <= 2/(Pi e D) int |grad f|^2 (int |f|)^(4/D)."""
    w = _weight_of(f, w)
    D = w.D
    fl = _functionals(f, [LP(1), LP(2), GRAD(2)], spec)
    lhs = fl.lp(2) ** (1.0 + 2.0 / D)
    rhs = 2.0 / (pi_A(w) * math.e * D) * fl.grad_lp(2) * fl.lp(1) ** (4.0 / D)
    err = lhs * (1.0 + 2.0 / D) * _rel(fl, LP(2)) + rhs * (_rel(fl, GRAD(2)) + (4.0 / D) * _rel(fl, LP(1)))
    return _report("nash", w, f, lhs, rhs, err, {}, fl)


def check_shannon(f: TestFunction, w=None, alpha: float = 2.0, spec: QuadratureSpec | None = None, *,
                  normalize: bool = True) -> InequalityReport:
    """-int |f| log |f| <= (D/alpha) log(alpha C_A(alpha) e / D int |f| |x|^alpha), unit L^1 mass."""
    w = _weight_of(f, w)
    D = w.D
    CA = K.shannon_c_A(w, alpha)
    fl, c = _normalized(_functionals(f, [LP(1), ENT(1), MOMENT(1, alpha)], spec), 1.0, normalize)
    J = fl.moment(1, alpha)
    lhs = -fl.entropy(1)
    rhs, rhs_err = _log_side(D / alpha, alpha * CA * math.e / D * J, fl, [(MOMENT(1, alpha), 1.0)])
    err = fl.err(ENT(1)) + rhs_err
    return _report("shannon", w, f, lhs, rhs, err, {"alpha": alpha, "C_A": CA, "J": J}, fl, c)


def check_l2_shannon(f: TestFunction, w=None, spec: QuadratureSpec | None = None, *, normalize: bool = True
                     ) -> InequalityReport:
    """-int f^2 log f^2 <= (D/2) log(2 Pi e / D int f^2 |x|^2), unit L^2 mass."""
    w = _weight_of(f, w)
    D = w.D
    fl, c = _normalized(_functionals(f, [LP(2), ENT(2), MOMENT(2, 2)], spec), 2.0, normalize)
    M = fl.moment(2, 2)
    lhs = -fl.entropy(2)
    rhs, rhs_err = _log_side(D / 2.0, 2.0 * pi_A(w) * math.e / D * M, fl, [(MOMENT(2, 2), 1.0)])
    err = fl.err(ENT(2)) + rhs_err
    return _report("l2_shannon", w, f, lhs, rhs, err, {"moment": M}, fl, c)


def check_heisenberg(f: TestFunction, w=None, spec: QuadratureSpec | None = None, *, normalize: bool = True
                     ) -> InequalityReport:
    """D^2/4 <= (int f^2 |x|^2)(int |grad f|^2), unit L^2 mass."""
    w = _weight_of(f, w)
    D = w.D
    fl, c = _normalized(_functionals(f, [LP(2), MOMENT(2, 2), GRAD(2)], spec), 2.0, normalize)
    M, G = fl.moment(2, 2), fl.grad_lp(2)
    lhs = D * D / 4.0
    rhs = M * G
    err = rhs * (_rel(fl, MOMENT(2, 2)) + _rel(fl, GRAD(2)))
    return _report("heisenberg", w, f, lhs, rhs, err, {"moment": M, "energy": G}, fl, c)


def check_l1_logsob(f: TestFunction, w=None, spec: QuadratureSpec | None = None, *, normalize: bool = True
                    ) -> InequalityReport:
    """int |f| log |f| <= D log(C_1 int |grad f|), unit L^1 mass.

    Indicators contribute their perimeter as the total variation.
    """
    w = _weight_of(f, w)
    D = w.D
    C1 = K.sobolev_c1(w)
    fl, c = _normalized(_functionals(f, [LP(1), ENT(1), GRAD(1)], spec), 1.0, normalize)
    g = fl.grad_lp(1)
    if not g > 0:
        raise DomainError("zero total variation")
    lhs = fl.entropy(1)
    rhs, rhs_err = _log_side(D, C1 * g, fl, [(GRAD(1), 1.0)])
    err = fl.err(ENT(1)) + rhs_err
    return _report("l1_logsob", w, f, lhs, rhs, err, {"C1": C1}, fl, c)


def check_lp_logsob(f: TestFunction, w=None, p: float = 2.0, spec: QuadratureSpec | None = None, *,
                    normalize: bool = True) -> InequalityReport:
    """int |f|^p log |f|^p <= (D/p) log(C_p^p int |grad f|^p), unit L^p mass, 1 < p < D."""
    w = _weight_of(f, w)
    D = w.D
    Cp = K.sobolev_cp(w, p)
    fl, c = _normalized(_functionals(f, [LP(p), ENT(p), GRAD(p)], spec), p, normalize)
    g = fl.grad_lp(p)
    if not g > 0:
        raise DomainError("zero gradient energy")
    lhs = fl.entropy(p)
    rhs, rhs_err = _log_side(D / p, Cp**p * g, fl, [(GRAD(p), 1.0)])
    err = fl.err(ENT(p)) + rhs_err
    return _report("lp_logsob", w, f, lhs, rhs, err, {"p": p, "Cp": Cp}, fl, c)


# ---------------------------------------------------------------- trace


def check_trace(f: TestFunction, w=None, p: float = 2.0, spec: QuadratureSpec | None = None, *,
                variant: str = "sobolev", normalize: bool = True) -> InequalityReport:
    """Trace inequalities for f on R^n_A x [0, inf), with g = f(., 0).

    ``variant="sobolev"``: ||g||_q <= q^(1/q) C^e ||grad f||_p.
    ``variant="log"``: for ||g||_p = 1,
    int |g|^p log |g|^p <= (Dp/(p-1)) log(q^(1/q) C^e ||grad f||_p),
    the form that follows from Jensen's inequality and the Sobolev variant.
    The right side of the alternative reading,
    (D/p) log((C^e int |grad f|^p)^(1/p)), is reported in ``extras``.
    """
    if w is None:
        w = Weight(f.weight.A[:-1])
    elif not isinstance(w, Weight):
        w = Weight(w)
    if f.weight != w.extend(0.0):
        raise DomainError(f"trace checks need f on {w.extend(0.0)}, got {f.weight}")
    if variant not in ("sobolev", "log"):
        raise DomainError("variant must be 'sobolev' or 'log'")
    D = w.D
    q, T = K.trace_constants(w, p)
    spec = spec or DEFAULT_SPEC
    g = trace_slice(f)
    half = w.positive + (True,)
    fg = functionals_of(f, [GRAD(p)], spec, half)
    G = fg.grad_lp(p)
    if not G > 0:
        raise DomainError("zero gradient energy")
    params = {"p": p, "q": q, "trace_const": T, "variant": variant}
    if variant == "sobolev":
        fs = functionals_of(g, [LP(q)], spec)
        lhs = fs.lp(q) ** (1.0 / q)
        rhs = T * G ** (1.0 / p)
        err = lhs * _rel(fs, LP(q)) / q + rhs * _rel(fg, GRAD(p)) / p
        fl = Functionals({**fs.values, **fg.values}, {**fs.errors, **fg.errors},
                         fs.converged and fg.converged)
        return _report("trace", w, f, lhs, rhs, err, params, fl)

    if p <= 1.0:
        raise DomainError("the logarithmic trace inequality needs p > 1")
    fs, c = _normalized(functionals_of(g, [LP(p), ENT(p)], spec), p, normalize)
    # rescaling f by c rescales its trace by c and its gradient norm by c
    Gc = c**p * G
    lhs = fs.entropy(p)
    coef = D * p / (p - 1.0)
    rhs = coef * math.log(T * Gc ** (1.0 / p))
    err = fs.err(ENT(p)) + coef * _rel(fg, GRAD(p)) / p
    expo = (D + 1.0 - p) * (p - 1.0) / (D * p)
    Cn1 = K.sobolev_cp(w.extend(0.0), p)
    printed = (D / p) * (1.0 / p) * math.log(Cn1**expo * Gc)
    fl = Functionals({**fs.values, **fg.values}, {**fs.errors, **fg.errors}, fs.converged and fg.converged)
    return _report("trace_log", w, f, lhs, rhs, err, params, fl, c,
                   extras={"printed_rhs": printed, "printed_deficit": printed - lhs})


# ---------------------------------------------------------------- bounded domains


def _domain_measure(w, domain, spec):
    if not isinstance(domain, Ball):
        raise DomainError("bounded-domain checks support centred balls")
    v, e = integrate_radial(lambda r: np.ones_like(np.asarray(r, float)), w, spec,
                            support=domain.radius, scale=domain.radius)
    return v, e


def _require_support(u, domain, spec):
    ball = u.support_ball()
    if ball is not None:
        if float(np.linalg.norm(ball[0])) + ball[1] <= domain.radius * (1.0 + 1e-12):
            return
    elif u.radial() is None:
        box = np.asarray(u.extent(spec.abs_tol))
        corner = np.sqrt(np.sum(np.max(np.abs(box), axis=1) ** 2))
        if corner <= domain.radius * (1.0 + 1e-12):
            return
    raise DomainError("u must be compactly supported in the domain")


def check_refined_sobolev(u: TestFunction, w=None, q: float = 4.0, domain: Ball = Ball(1.0), C0: float = 1.0,
                          spec: QuadratureSpec | None = None) -> InequalityReport:
    """||u||_q <= C(q) q^((D-1)/D) ||grad u||_D on a bounded domain.

    Valid only when ``C0`` bounds the Trudinger-Moser functional; pass a
    conservative value.
    """
    w = _weight_of(u, w)
    D = w.D
    spec = spec or DEFAULT_SPEC
    _require_support(u, domain, spec)
    m, m_err = _domain_measure(w, domain, spec)
    Cq = K.refined_C_q(w, q, C0, m)
    theta = (D - 1.0) / D
    fl = _functionals(u, [LP(q), GRAD(D)], spec)
    lhs = fl.lp(q) ** (1.0 / q)
    rhs = Cq * q**theta * fl.grad_lp(D) ** (1.0 / D)
    err = lhs * _rel(fl, LP(q)) / q + rhs * (_rel(fl, GRAD(D)) / D + m_err / (q * m))
    return _report("refined_sobolev", w, u, lhs, rhs, err,
                   {"q": q, "C0": C0, "m_omega": m, "C_q": Cq, "radius": domain.radius}, fl)


def check_tm_logsob(u: TestFunction, w=None, q: float = 4.0, domain: Ball = Ball(1.0), C0: float = 1.0,
                    spec: QuadratureSpec | None = None, *, normalize: bool = True) -> InequalityReport:
    """int |u|^D log |u|^D <= (Dq/(q-D)) log(C(q) q^((D-1)/D) ||grad u||_D), unit L^D mass, q > D."""
    w = _weight_of(u, w)
    D = w.D
    if not q > D:
        raise DomainError(f"q must exceed D={D:g}")
    spec = spec or DEFAULT_SPEC
    _require_support(u, domain, spec)
    m, m_err = _domain_measure(w, domain, spec)
    Cq = K.refined_C_q(w, q, C0, m)
    theta = (D - 1.0) / D
    fl, c = _normalized(_functionals(u, [LP(D), ENT(D), GRAD(D)], spec), D, normalize)
    coef = D * q / (q - D)
    lhs = fl.entropy(D)
    rhs = coef * math.log(Cq * q**theta * fl.grad_lp(D) ** (1.0 / D))
    err = fl.err(ENT(D)) + coef * (_rel(fl, GRAD(D)) / D + m_err / (q * m))
    return _report("tm_logsob", w, u, lhs, rhs, err,
                   {"q": q, "C0": C0, "m_omega": m, "C_q": Cq, "radius": domain.radius}, fl, c)


def check_gamma_exp_bound(x: float, s: float) -> InequalityReport:
    """x^s / Gamma(s+1) <= e^x for x, s >= 0, compared in log space."""
    if x < 0 or s < 0:
        raise DomainError("x and s must be nonnegative")
    if x == 0:
        lhs = 0.0 if s == 0 else -math.inf
    else:
        lhs = s * math.log(x) - log_gamma(s + 1.0)
    rhs = x
    deficit, rel, verdict = verdict_for(lhs, rhs, 4e-16 * max(abs(lhs), abs(rhs), 1.0))
    return InequalityReport("gamma_exp_bound", (), {"family": "scalar", "x": x, "s": s}, lhs, rhs,
                            deficit, rel, 0.0, verdict, {"x": x, "s": s}, extras={"scale": "log"})


# ---------------------------------------------------------------- tensorization


def tensor_consistency(f: TestFunction, w=None, l: int = 2, p: float = 2.0,
                       spec: QuadratureSpec | None = None, *, independent: bool | None = None
                       ) -> list[InequalityReport]:
    """Product rules on l copies: int |F|^p = (int |f|^p)^l and, for unit L^2 mass,
    int |grad F|^2 = l int |grad f|^2.

    With ``independent`` (default: whenever l*n fits the cubature cap) the
    left sides come from full cubature on R^{ln} instead of the separable route.
    """
    w = _weight_of(f, w)
    spec = spec or DEFAULT_SPEC
    one, c = _normalized(_functionals(f, [LP(2), LP(p), GRAD(2)], spec), 2.0, True)
    F = tensorize(f, l)
    if independent is None:
        independent = l * w.n <= spec.cubature_dim_cap
    route = "cubature" if independent else "auto"
    many = functionals_of(F, [LP(2), LP(p), GRAD(2)], spec, route=route).scaled(c**l)
    reports = []
    lhs, rhs = many.lp(p), one.lp(p) ** l
    err = many.err(LP(p)) + rhs * l * _rel(one, LP(p))
    reports.append(_report("tensor_lp", F.weight, F, lhs, rhs, err,
                           {"l": l, "p": p, "route": route}, many, c))
    lhs, rhs = many.grad_lp(2), l * one.grad_lp(2)
    err = many.err(GRAD(2)) + rhs * _rel(one, GRAD(2))
    reports.append(_report("tensor_grad", F.weight, F, lhs, rhs, err, {"l": l, "route": route}, many, c))
    return reports


CHECKERS = {
    "sobolev": check_sobolev,
    "logsob": check_logsob,
    "nash": check_nash,
    "shannon": check_shannon,
    "l2_shannon": check_l2_shannon,
    "heisenberg": check_heisenberg,
    "l1_logsob": check_l1_logsob,
    "lp_logsob": check_lp_logsob,
    "whole_space": check_whole_space_sobolev,
    "trace": check_trace,
    "refined": check_refined_sobolev,
    "tm_logsob": check_tm_logsob,
}


def run_check(ineq: str, f: TestFunction, w=None, spec: QuadratureSpec | None = None, **params
              ) -> InequalityReport:
    """Dispatch to a checker by name; ``params`` supplies p, alpha, q, C0, radius or variant."""
    if ineq not in CHECKERS:
        raise DomainError(f"unknown inequality {ineq!r}; choose from {sorted(CHECKERS)}")
    check = CHECKERS[ineq]
    if ineq in ("sobolev", "whole_space", "lp_logsob"):
        return check(f, w, params.get("p", 2.0), spec)
    if ineq == "shannon":
        return check(f, w, params.get("alpha", 2.0), spec)
    if ineq == "trace":
        return check(f, w, params.get("p", 2.0), spec, variant=params.get("variant", "sobolev"))
    if ineq in ("refined", "tm_logsob"):
        return check(f, w, params.get("q", 4.0), Ball(params.get("radius", 1.0)), params.get("C0", 1.0), spec)
    return check(f, w, spec=spec)

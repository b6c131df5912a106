"""Sharp and derived constants as pure functions of a weight and exponents.

Gamma ratios are evaluated through ``log_gamma``; Gamma(lD) overflows double
precision once lD passes about 170.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DomainError
from .special import Weight, ball_geometry, log_gamma, log_pi_A, pi_A

__all__ = [
    "sobolev_c1",
    "sobolev_cp",
    "sobolev_constant",
    "critical_exponent",
    "shannon_c_A",
    "tm_alpha_D",
    "whole_space_K",
    "trace_constants",
    "refined_C_q",
    "refined_C_q_limit",
    "asymptotic_term",
    "asymptotic_limit",
    "ConstantsTable",
    "constants_table",
]


def _log_sum_gamma_half(w: Weight) -> float:
    return math.fsum(log_gamma((a + 1.0) / 2.0) for a in w.A)


def sobolev_c1(w: Weight) -> float:
    """Best constant of the weighted L^1 Sobolev inequality (inverse isoperimetric constant)."""
    D = w.D
    log_inner = w.k * math.log(2.0) + log_gamma(1.0 + D / 2.0) - _log_sum_gamma_half(w)
    return math.exp(log_inner / D) / D


def sobolev_cp(w: Weight, p: float) -> float:
    """Best constant C_{p,n,A} for 1 < p < D; the extremals are (a + b|x|^p')^(1-D/p)."""
    D = w.D
    p = float(p)
    if not (1.0 < p < D):
        raise DomainError(f"sobolev_cp needs 1 < p < D={D:g}, got p={p!r}")
    pp = p / (p - 1.0)
    log_c = (
        math.log(sobolev_c1(w))
        + (1.0 - 1.0 / p - 1.0 / D) * math.log(D)
        + (1.0 / pp) * math.log((p - 1.0) / (D - p))
        + (math.log(pp) + log_gamma(D) - log_gamma(D / p) - log_gamma(D / pp)) / D
    )
    return math.exp(log_c)


def sobolev_constant(w: Weight, p: float) -> float:
    """C_{1,n,A} at p = 1, C_{p,n,A} otherwise."""
    if p == 1:
        if w.D <= 1:
            raise DomainError("the L^1 Sobolev inequality needs D > 1")
        return sobolev_c1(w)
    return sobolev_cp(w, p)


def critical_exponent(w: Weight, p: float) -> float:
    """p_* = Dp/(D-p)."""
    D = w.D
    if not (1.0 <= p < D):
        raise DomainError(f"critical exponent needs 1 <= p < D={D:g}, got {p!r}")
    return D * p / (D - p)


def shannon_c_A(w: Weight, alpha: float) -> float:
    """C_A(alpha): the rate normalising exp(-C |x|^alpha) to unit weighted mass."""
    alpha = float(alpha)
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha!r}")
    D = w.D
    log_inner = log_gamma(D / alpha + 1.0) - log_gamma(D / 2.0 + 1.0) + 0.5 * D * log_pi_A(w)
    return math.exp(log_inner * alpha / D)


def tm_alpha_D(w: Weight) -> float:
    """Sharp Trudinger-Moser exponent D * P(B_1^A)^(1/(D-1))."""
    D = w.D
    if not D > 1:
        raise DomainError(f"alpha_D needs D > 1, got D={D:g}")
    P = ball_geometry(w).perimeter
    return D * P ** (1.0 / (D - 1.0))


def whole_space_K(w: Weight, p: float) -> float:
    """Sobolev constant valid on all of R^n.

    Follows the printed case split: 2^(1/D) C_p for p < D/2, C_p for
    D/2 <= p < D.  The superadditivity a^q + b^q <= (a+b)^q (q >= 1) would give
    C_p on both branches, so the first branch is conservative.
    """
    D = w.D
    if not (1.0 <= p < D):
        raise DomainError(f"whole_space_K needs 1 <= p < D={D:g}, got {p!r}")
    c = sobolev_constant(w, p)
    if p < D / 2.0:
        return 2.0 ** (1.0 / D) * c
    return c


def trace_constants(w: Weight, p: float) -> tuple[float, float]:
    """Exponent q = Dp/(D+1-p) and the Sobolev trace constant q^(1/q) C_{p,n+1,A'}^e."""
    D = w.D
    p = float(p)
    if not (1.0 <= p < D + 1.0):
        raise DomainError(f"trace inequality needs 1 <= p < D+1={D + 1:g}, got {p!r}")
    q = D * p / (D + 1.0 - p)
    expo = (D + 1.0 - p) * (p - 1.0) / (D * p)
    if expo == 0.0:
        return q, q ** (1.0 / q)
    c = sobolev_cp(w.extend(0.0), p)
    return q, q ** (1.0 / q) * c**expo


def refined_C_q(w: Weight, q: float, C0: float = 1.0, m_omega: float = 1.0) -> float:
    """C(q) with ||u||_q <= C(q) q^((D-1)/D) ||grad u||_D on a bounded domain.

    ``C0`` is the Trudinger-Moser constant (unknown in closed form) and
    ``m_omega`` the weighted measure of the domain.
    """
    D = w.D
    q = float(q)
    if not D > 1:
        raise DomainError(f"refined Sobolev constant needs D > 1, got D={D:g}")
    if not q >= 2:
        raise DomainError(f"q must be >= 2, got {q!r}")
    if not (C0 > 0 and m_omega > 0):
        raise DomainError("C0 and m_omega must be positive")
    theta = (D - 1.0) / D
    log_c = (
        log_gamma(theta * q + 1.0) / q
        + (math.log(C0) + math.log(m_omega)) / q
        - theta * math.log(tm_alpha_D(w))
        - theta * math.log(q)
    )
    return math.exp(log_c)


def refined_C_q_limit(w: Weight) -> float:
    """lim_{q->inf} C(q) = [(D-1)/(D alpha_D e)]^((D-1)/D)."""
    D = w.D
    return ((D - 1.0) / (D * tm_alpha_D(w) * math.e)) ** ((D - 1.0) / D)


def asymptotic_term(w: Weight, l: int) -> float:
    """l * C_{2,ln,B}^2 for B = (A,...,A) (l copies)."""
    l = int(l)
    if l < 1:
        raise DomainError("l must be a positive integer")
    D = w.D
    lD = l * D
    if not lD > 2:
        raise DomainError(f"need lD > 2, got lD={lD:g}")
    log_t = (
        -math.log(D)
        - log_pi_A(w)
        - math.log(lD - 2.0)
        + (2.0 / lD) * (log_gamma(lD) - log_gamma(lD / 2.0))
    )
    return math.exp(log_t)


def asymptotic_limit(w: Weight) -> float:
    """2 / (Pi(A) e D)."""
    return 2.0 / (pi_A(w) * math.e * w.D)


@dataclass
class ConstantsTable:
    weight: Weight
    p: float | None = None
    alpha: float | None = None
    q: float | None = None
    values: dict[str, float] = field(default_factory=dict)

    def rows(self) -> list[tuple[str, float]]:
        return list(self.values.items())


def constants_table(
    w: Weight,
    p: float | None = None,
    alpha: float | None = None,
    q: float | None = None,
    C0: float = 1.0,
    m_omega: float | None = None,
) -> ConstantsTable:
    """Every constant applicable to (w, p, alpha, q); inapplicable entries are skipped."""
    geom = ball_geometry(w)
    D = w.D
    vals: dict[str, float] = {
        "n": float(w.n),
        "D": D,
        "k": float(w.k),
        "pi_A": geom.pi_A,
        "ball_measure": geom.measure,
        "ball_perimeter": geom.perimeter,
        "C_A(2)": shannon_c_A(w, 2.0),
        "logsob_limit": asymptotic_limit(w),
    }
    if D > 1:
        vals["C1"] = sobolev_c1(w)
        vals["alpha_D"] = tm_alpha_D(w)
        vals["C_q_limit"] = refined_C_q_limit(w)
    if p is not None:
        if 1 < p < D:
            vals["Cp"] = sobolev_cp(w, p)
        if 1 <= p < D and not (p == 1 and D <= 1):
            vals["p_star"] = critical_exponent(w, p)
            vals["K_whole_space"] = whole_space_K(w, p)
        if 1 <= p < D + 1:
            tq, tc = trace_constants(w, p)
            vals["trace_q"] = tq
            vals["trace_const"] = tc
    if alpha is not None:
        vals[f"C_A({alpha:g})"] = shannon_c_A(w, alpha)
    if q is not None and D > 1 and q >= 2:
        m = geom.measure if m_omega is None else m_omega
        vals["C_q"] = refined_C_q(w, q, C0, m)
    return ConstantsTable(weight=w, p=p, alpha=alpha, q=q, values=vals)

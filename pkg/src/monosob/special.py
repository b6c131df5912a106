"""Monomial weights and the special functions every constant is built from.

A weight is the exponent vector ``A``; the measure is
``x^A dx = |x_1|^A_1 ... |x_n|^A_n dx`` on the cone where every coordinate with a
positive exponent is positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

__all__ = [
    "Weight",
    "BallGeometry",
    "log_gamma",
    "gamma",
    "stirling_gamma",
    "log_stirling_gamma",
    "stirling_relative_error",
    "pi_A",
    "log_pi_A",
    "ball_geometry",
]


@dataclass(frozen=True)
class Weight:
    """Exponent vector of a monomial weight.

    Equality and hashing compare the exponents exactly.
    """

    A: tuple[float, ...]

    def __post_init__(self):
        try:
            A = tuple(float(a) for a in self.A)
        except TypeError:
            A = (float(self.A),)
        if not A:
            raise DomainError("weight needs at least one exponent")
        for i, a in enumerate(A):
            if not math.isfinite(a) or a < 0:
                raise DomainError(f"exponent A[{i}]={a!r} must be a finite nonnegative real")
        object.__setattr__(self, "A", A)

    @classmethod
    def zeros(cls, n: int) -> "Weight":
        return cls((0.0,) * n)

    @classmethod
    def parse(cls, text: str) -> "Weight":
        """Parse a comma separated exponent list such as ``"1,0.5,0"``."""
        parts = [p.strip() for p in text.split(",") if p.strip()]
        try:
            values = [float(p) for p in parts]
        except ValueError as exc:
            raise DomainError(f"cannot parse exponents from {text!r}") from exc
        return cls(tuple(values))

    @property
    def n(self) -> int:
        return len(self.A)

    @property
    def D(self) -> float:
        return self.n + math.fsum(self.A)

    @property
    def k(self) -> int:
        return sum(1 for a in self.A if a > 0)

    @property
    def positive(self) -> tuple[bool, ...]:
        """Coordinates restricted to positive values on the weighted cone."""
        return tuple(a > 0 for a in self.A)

    def repeat(self, l: int) -> "Weight":
        """The l-fold concatenation (A, A, ..., A)."""
        if l < 1:
            raise DomainError("repeat count must be at least 1")
        return Weight(self.A * l)

    def extend(self, *extra: float) -> "Weight":
        return Weight(self.A + tuple(extra))

    def concat(self, other: "Weight") -> "Weight":
        return Weight(self.A + other.A)

    def __str__(self):
        return "A=(" + ", ".join(f"{a:g}" for a in self.A) + ")"


@dataclass(frozen=True)
class BallGeometry:
    """Weighted measure and perimeter of the unit ball intersected with the cone."""

    measure: float
    perimeter: float
    pi_A: float


def log_gamma(s: float) -> float:
    """ln Gamma(s) for s > 0."""
    s = float(s)
    if not s > 0:
        raise DomainError(f"log_gamma needs s > 0, got {s!r}")
    return math.lgamma(s)


def gamma(s: float) -> float:
    return math.exp(log_gamma(s))


def log_stirling_gamma(s: float) -> float:
    """Log of the leading Stirling approximation s^s e^-s sqrt(2 pi s) of Gamma(s+1)."""
    s = float(s)
    if not s > 0:
        raise DomainError(f"Stirling approximation needs s > 0, got {s!r}")
    return s * math.log(s) - s + 0.5 * math.log(2.0 * math.pi * s)


def stirling_gamma(s: float) -> float:
    """Leading Stirling approximation of Gamma(s+1).

    Overflows to ``inf`` beyond s of about 143; use :func:`log_stirling_gamma`
    for large arguments.
    """
    try:
        return math.exp(log_stirling_gamma(s))
    except OverflowError:
        return math.inf


def stirling_relative_error(s: float) -> float:
    """|stirling_gamma(s) / Gamma(s+1) - 1|, computed in log space."""
    return abs(math.expm1(log_stirling_gamma(s) - log_gamma(s + 1.0)))


def log_pi_A(w: Weight) -> float:
    total = math.fsum(log_gamma((a + 1.0) / 2.0) for a in w.A)
    return (2.0 / w.D) * (total - w.k * math.log(2.0))


def pi_A(w: Weight) -> float:
    """[prod Gamma((A_i+1)/2) / 2^k]^(2/D); equals pi for the zero weight."""
    return math.exp(log_pi_A(w))


def ball_geometry(w: Weight) -> BallGeometry:
    D = w.D
    log_m = 0.5 * D * log_pi_A(w) - log_gamma(0.5 * D + 1.0)
    m = math.exp(log_m)
    return BallGeometry(measure=m, perimeter=D * m, pi_A=pi_A(w))


"""Exponent triple (p, q, r), derived exponents and the symmetry threshold."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DomainError

SYMMETRIC = "Symmetric"
ASYMMETRIC = "Asymmetric"


@dataclass(frozen=True)
class Parameters:
    """Exponents of the Wirtinger problem.

    ``p`` is the exponent on the derivative, ``q`` the exponent on the
    function and ``r`` the exponent of the integral constraint
    ``int |u|^(r-2) u = 0``.  ``p_star`` is the conjugate of ``p`` and
    ``theta = 1/p_star + 1/q`` is the scaling exponent of the interval length.
    """

    p: float
    q: float
    r: float
    p_star: float = field(init=False)
    theta: float = field(init=False)

    def __post_init__(self) -> None:
        for name in ("p", "q", "r"):
            value = getattr(self, name)
            try:
                value = float(value)
            except (TypeError, ValueError):
                raise DomainError(f"{name} must be a real number, got {value!r}") from None
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value}")
            if value <= 1.0:
                raise DomainError(f"{name} must be > 1, got {value}")
            object.__setattr__(self, name, value)
        p_star = self.p / (self.p - 1.0)
        object.__setattr__(self, "p_star", p_star)
        object.__setattr__(self, "theta", 1.0 / p_star + 1.0 / self.q)

    @property
    def threshold(self) -> float:
        """Critical value (2r-1)p of q."""
        return (2.0 * self.r - 1.0) * self.p

    @property
    def prefactor(self) -> float:
        """theta^theta * p*^(1/p*) * q^(1/q), converting min J into lambda_W."""
        th = self.theta
        return th**th * self.p_star ** (1.0 / self.p_star) * self.q ** (1.0 / self.q)

    def as_dict(self) -> dict:
        return {"p": self.p, "q": self.q, "r": self.r}


@dataclass(frozen=True)
class SymmetryClass:
    tag: str
    margin: float

    @property
    def symmetric(self) -> bool:
        return self.tag == SYMMETRIC


def derive(p: float, q: float, r: float) -> Parameters:
    """Build a validated :class:`Parameters`; raises ``DomainError``."""
    return Parameters(p, q, r)


def classify(params: Parameters) -> SymmetryClass:
    """Odd minimizers iff ``q <= (2r-1)p``; the boundary counts as symmetric."""
    margin = params.q - params.threshold
    return SymmetryClass(SYMMETRIC if margin <= 0.0 else ASYMMETRIC, margin)

"""Roots of ``1 + mu |x|^(r-2) x - |x|^q = 0`` closest to the origin.

For ``mu >= 0`` the negative root ``x1`` lies in ``(-1, 0]`` and the positive
root ``x2`` is at least 1.  The pair is summarized by the shape ratio
``m = -x1 / x2`` and ``R = (1 - m^q) / (1 + m^(r-1))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConvergenceError, DomainError
from .params import Parameters

DEFAULT_TOL = 1e-12
_MAX_DOUBLINGS = 64
# relative widths on [0, 1] may need the full exponent range of a double
_MAX_BISECTIONS = 1100
_NEWTON_POLISH = 3


@dataclass(frozen=True)
class RootPair:
    mu: float
    x1: float
    x2: float
    m: float
    R: float


def _bracketed_root(h, dh, lo, hi, tol, decreasing):
    """Bisection to width ``tol`` followed by safeguarded Newton polishing."""
    for _ in range(_MAX_BISECTIONS):
        if hi - lo <= tol * max(abs(lo), abs(hi)):
            break
        mid = 0.5 * (lo + hi)
        if (h(mid) > 0.0) == decreasing:
            lo = mid
        else:
            hi = mid
    else:
        raise ConvergenceError(f"bisection did not reach width {tol} on [{lo}, {hi}]")
    x = 0.5 * (lo + hi)
    for _ in range(_NEWTON_POLISH):
        slope = dh(x)
        if slope == 0.0 or not math.isfinite(slope):
            break
        step = h(x) / slope
        cand = x - step
        # Newton may not leave the bisection bracket
        if not lo <= cand <= hi:
            break
        x = cand
        if abs(step) <= 4e-16 * abs(x):
            break
    return x


def _positive_root(q: float, r: float, mu: float, tol: float) -> float:
    """Smallest root >= 1 of 1 + mu x^(r-1) - x^q."""
    if mu == 0.0:
        return 1.0

    def k(x):
        return 1.0 + mu * x ** (r - 1.0) - x**q

    def dk(x):
        return mu * (r - 1.0) * x ** (r - 2.0) - q * x ** (q - 1.0)

    lo, hi = 1.0, 2.0
    for _ in range(_MAX_DOUBLINGS):
        if k(hi) < 0.0:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise DomainError(
            f"no sign change for the positive root with mu={mu}, q={q}, r={r}; "
            "mu lies outside the admissible set"
        )
    return _bracketed_root(k, dk, lo, hi, tol, decreasing=True)


def _negative_root_abs(q: float, r: float, mu: float, tol: float) -> float:
    """Unique t in (0, 1] with 1 - mu t^(r-1) - t^q = 0."""
    if mu == 0.0:
        return 1.0

    def h(t):
        return 1.0 - mu * t ** (r - 1.0) - t**q

    def dh(t):
        return -mu * (r - 1.0) * t ** (r - 2.0) - q * t ** (q - 1.0)

    return _bracketed_root(h, dh, 0.0, 1.0, tol, decreasing=True)


def shape_R(m: float, q: float, r: float) -> float:
    return (1.0 - m**q) / (1.0 + m ** (r - 1.0))


def solve_roots(params: Parameters, mu: float, tol: float = DEFAULT_TOL) -> RootPair:
    """Solve for ``x1(mu) < 0 < x2(mu)`` with ``mu >= 0``.

    Negative ``mu`` is the caller's business (reflect ``x -> -x``).
    """
    mu = float(mu)
    if not math.isfinite(mu) or mu < 0.0:
        raise DomainError(f"solve_roots needs a finite mu >= 0, got {mu}")
    if not tol > 0.0:
        raise ValueError("tol must be positive")
    q, r = params.q, params.r
    x2 = _positive_root(q, r, mu, tol)
    t1 = _negative_root_abs(q, r, mu, tol)
    for x, sign in ((x2, 1.0), (t1, -1.0)):
        residual = 1.0 + sign * mu * x ** (r - 1.0) - x**q
        scale = 1.0 + mu * x ** (r - 1.0) + x**q
        if abs(residual) > tol * scale:
            raise ConvergenceError(f"root {sign * x} has residual {residual:.3e} for mu={mu}")
    m = t1 / x2
    return RootPair(mu=mu, x1=-t1, x2=x2, m=m, R=shape_R(m, q, r))


def domain_contains(params: Parameters, mu: float) -> bool:
    """Whether the defining equation has two real roots at ``mu``.

    Always true when ``q > r - 1``; otherwise decided by whether the
    positive-root bracketing succeeds for ``|mu|``.
    """
    mu = abs(float(mu))
    if not math.isfinite(mu):
        return False
    if params.q > params.r - 1.0:
        return True
    try:
        _positive_root(params.q, params.r, mu, DEFAULT_TOL)
    except DomainError:
        return False
    return True

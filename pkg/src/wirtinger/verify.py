"""Numerical checks of the symmetry argument for ``q <= (2r-1)p``.

The key inequality compares two singular integrals over (0, 1).  It follows
from a pointwise inequality after the substitution ``x = u(t)`` with
``u(t) = m t / D(t)``, which in turn reduces to two monotonicity lemmas and
an exact algebraic identity at ``t = 1``.  Every ingredient is checked here
on sampled parameters.

Differences ``1 - y^c`` close to ``y = 1`` are evaluated in log space so that
the equality case at the right endpoint is resolved without cancellation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ._numerics import one_minus_pow
from .errors import DomainError
from .jfun import key_integrals, key_integrands
from .params import Parameters
from .quad import DEFAULT_SPEC, QuadratureSpec, integrate
from .roots import shape_R

MONOTONE_GRID = 4096
# nearest approach to x = 1 on the monotonicity grids; psi_ab is flat to
# third order at x = 1, so its grid stops earlier to stay above rounding
PHI_D_MIN = 1e-6
PSI_D_MIN = 1e-2
# the grid starts where x^a is still resolvable against 1
MONOTONE_RESOLUTION = 1e-8
STRICT_TOL = 1e-15
SLACK_TOL = 1e-12
TRANSPORT_D_MIN = 1e-6


def _monotone_grid(a: float, grid_n: int, d_min: float):
    """Increasing grid on (0, 1) as ``(x, d)`` with ``d = 1 - x`` exact.

    Geometric in ``x`` up to 1/2 and geometric in ``d`` beyond, so points
    accumulate at ``x = 1``.
    """
    x_lo = min(MONOTONE_RESOLUTION ** (1.0 / a), 0.25) if a > 0.0 else 1e-3
    n_left = grid_n // 4
    x_left = np.geomspace(x_lo, 0.5, n_left, endpoint=False)
    d_right = np.geomspace(0.5, d_min, grid_n - n_left)
    x = np.concatenate([x_left, 1.0 - d_right])
    d = np.concatenate([1.0 - x_left, d_right])
    return x, d


def _decreasing(values, strict: bool) -> bool:
    diff = np.diff(values)
    scale = float(np.max(np.abs(values))) or 1.0
    if strict:
        return bool(np.all(diff < -STRICT_TOL * scale))
    return bool(np.all(diff <= STRICT_TOL * scale))


def _one_minus(x, d, c):
    """``1 - x^c`` from whichever of ``x`` and ``d = 1 - x`` is accurate."""
    near = x > 0.5
    return np.where(near, one_minus_pow(np.where(near, d, 0.0), c), 1.0 - x**c)


def phi_ab(a: float, b: float, x, d=None):
    """``(1 - x^a) / (1 - x^b)``; pass ``d = 1 - x`` for accuracy near 1."""
    x = np.asarray(x, dtype=float)
    d = 1.0 - x if d is None else np.asarray(d, dtype=float)
    return _one_minus(x, d, a) / _one_minus(x, d, b)


def psi_ab(a: float, b: float, x, d=None):
    """``(1 - x^a)(1 + x^b) / (1 - x^(a+b))``."""
    x = np.asarray(x, dtype=float)
    d = 1.0 - x if d is None else np.asarray(d, dtype=float)
    return _one_minus(x, d, a) * (1.0 + x**b) / _one_minus(x, d, a + b)


def phi_monotone(a: float, b: float, grid_n: int = MONOTONE_GRID) -> bool:
    """Whether ``phi_ab`` is nonincreasing on the grid (strictly when a > 0)."""
    if not (0.0 <= a < b):
        raise DomainError(f"phi_monotone needs 0 <= a < b, got a={a}, b={b}")
    if a == 0.0:
        return _decreasing(np.zeros(grid_n), strict=False)
    return _decreasing(phi_ab(a, b, *_monotone_grid(a, grid_n, PHI_D_MIN)), strict=True)


def psi_monotone(a: float, b: float, grid_n: int = MONOTONE_GRID) -> bool:
    """Whether ``psi_ab`` is strictly decreasing on the grid."""
    if not (0.0 < a < b):
        raise DomainError(f"psi_monotone needs 0 < a < b, got a={a}, b={b}")
    return _decreasing(psi_ab(a, b, *_monotone_grid(a, grid_n, PSI_D_MIN)), strict=True)


# variable change ----------------------------------------------------------


def _change_terms(m: float, r: float, x, d):
    """``(D, u, u', 1 - u)`` with ``d = 1 - x`` supplied exactly."""
    a = r - 1.0
    x = np.asarray(x, dtype=float)
    d = np.asarray(d, dtype=float)
    om = one_minus_pow(1.0 - m, a)  # 1 - m^(r-1)
    near = x > 0.5
    one_minus_xa = np.where(near, one_minus_pow(np.where(near, d, 0.0), a), 1.0 - x**a)
    Da = 1.0 - om * x**a
    # D^(r-1) = m^(r-1) + (1 - m^(r-1)) (1 - x^(r-1)) is free of cancellation
    Da = np.where(near, m**a + om * one_minus_xa, Da)
    D = Da ** (1.0 / a)
    u = m * x / D
    uprime = m / D**r
    # 1 - u^(r-1) = (1 - x^(r-1)) / D^(r-1)
    w = one_minus_xa / Da
    one_minus_u = one_minus_pow(np.minimum(w, 1.0), 1.0 / a)
    return D, u, uprime, one_minus_u


def variable_change(m: float, r: float, x):
    """``D(x)``, ``u(x) = m x / D`` and ``u'(x) = m / D^r``."""
    if not 0.0 < m < 1.0:
        raise DomainError(f"m must lie in (0, 1), got {m}")
    xa = np.asarray(x, dtype=float)
    if np.any((xa < 0.0) | (xa > 1.0)):
        raise DomainError("x must lie in [0, 1]")
    D, u, up, _ = _change_terms(m, r, xa, 1.0 - xa)
    if np.ndim(x) == 0:
        return float(D), float(u), float(up)
    return D, u, up


def _exponent(params: Parameters) -> float:
    return (2.0 * params.r - 1.0) * params.p


def pointwise_inequality(params: Parameters, m: float, x):
    """Slack of the reduced pointwise inequality at ``(m, x)``.

    Nonnegative in the symmetric regime; it tends to 0 as ``x -> 1``.
    """
    p, q, r = params.p, params.q, params.r
    A = _exponent(params)
    if q > A:
        raise DomainError(f"pointwise inequality needs q <= (2r-1)p = {A}, got q={q}")
    if not 0.0 < m < 1.0:
        raise DomainError(f"m must lie in (0, 1), got {m}")
    x = np.asarray(x, dtype=float)
    a = r - 1.0
    R = shape_R(m, q, r)
    om = -math.expm1(a * math.log(m))  # 1 - m^(r-1)
    log_D = np.log1p(-om * x**a) / a
    den = -np.expm1(A * log_D)
    first = R * m**a * x**a * (1.0 + np.exp((A - a) * log_D)) / den
    second = m**q * x**q * -np.expm1((A - q) * log_D) / den
    slack = (1.0 - R) - first - second
    return float(slack) if slack.ndim == 0 else slack


def terminal_identity_residual(p: float, q: float, r: float, m: float) -> float:
    """Residual of the algebraic identity that closes the symmetry proof."""
    if not 0.0 < m < 1.0:
        raise DomainError(f"m must lie in (0, 1), got {m}")
    A = (2.0 * r - 1.0) * p
    R = shape_R(m, q, r)
    lhs = (1.0 - R) * (1.0 - m**A)
    rhs = R * m ** (r - 1.0) * (1.0 + m ** (A - r + 1.0)) + m**q * (1.0 - m ** (A - q))
    return abs(lhs - rhs)


# transport of integral inequalities -------------------------------------


@dataclass(frozen=True)
class TransportResult:
    holds: bool
    hypothesis: bool
    conclusion: bool
    vacuous: bool
    integral_f: float
    integral_g: float
    min_margin: float


def _transport_grid(grid_n: int):
    """Interior points of (0, 1), geometric towards both ends."""
    half = grid_n // 2
    left = np.geomspace(TRANSPORT_D_MIN, 0.5, half, endpoint=False)
    right = 1.0 - np.geomspace(0.5, TRANSPORT_D_MIN, grid_n - half)
    return np.concatenate([left, right])


def lemma31_transport(
    f: Callable,
    g: Callable,
    u: Callable,
    uprime: Callable,
    grid_n: int = 2048,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> TransportResult:
    """Check ``u'(x) f(u(x)) > g(x)`` on a grid and ``int f > int g`` by quadrature.

    ``holds`` is the implication hypothesis => conclusion; when the
    hypothesis fails the result is flagged ``vacuous``.
    """
    x = _transport_grid(grid_n)
    lhs = np.asarray(uprime(x), dtype=float) * np.asarray(f(np.asarray(u(x), dtype=float)), dtype=float)
    rhs = np.broadcast_to(np.asarray(g(x), dtype=float), x.shape)
    margin = lhs - rhs
    hypothesis = bool(np.all(margin > 0.0))
    i_f = integrate(lambda t: np.broadcast_to(np.asarray(f(t), dtype=float), t.shape), 0.0, 1.0, spec).value
    i_g = integrate(lambda t: np.broadcast_to(np.asarray(g(t), dtype=float), t.shape), 0.0, 1.0, spec).value
    conclusion = i_f > i_g
    return TransportResult(
        holds=(not hypothesis) or conclusion,
        hypothesis=hypothesis,
        conclusion=conclusion,
        vacuous=not hypothesis,
        integral_f=i_f,
        integral_g=i_g,
        min_margin=float(np.min(margin)),
    )


def key_functions(params: Parameters, m: float):
    """The two sides of the key integrand as plain callables of ``x``."""
    lhs, rhs = key_integrands(params, m)

    def f(x):
        x = np.asarray(x, dtype=float)
        return lhs(x, x, 1.0 - x)

    def g(x):
        x = np.asarray(x, dtype=float)
        return rhs(x, x, 1.0 - x)

    return f, g


def symmetry_transport(params: Parameters, m: float, grid_n: int = 2048, spec: QuadratureSpec = DEFAULT_SPEC) -> TransportResult:
    """Transport check with the integrands of the key inequality."""
    f, g = key_functions(params, m)
    r = params.r
    return lemma31_transport(
        f,
        g,
        lambda x: variable_change(m, r, x)[1],
        lambda x: variable_change(m, r, x)[2],
        grid_n,
        spec,
    )


def transported_lhs(params: Parameters, m: float, spec: QuadratureSpec = DEFAULT_SPEC):
    """``int_0^1 f(u(t)) u'(t) dt``; equals the direct left side exactly."""
    p, q, r = params.p, params.q, params.r
    R = shape_R(m, q, r)
    a = r - 1.0

    def integrand(t, da, db):
        D, u, up, omu = _change_terms(m, r, t, db)
        near = u > 0.5
        om_a = np.where(near, one_minus_pow(np.where(near, omu, 0.0), a), 1.0 - u**a)
        om_q = np.where(near, one_minus_pow(np.where(near, omu, 0.0), q), 1.0 - u**q)
        return up * u**a * (om_q - R * om_a) ** (-1.0 / p)

    return integrate(integrand, 0.0, 1.0, spec, endpoint_distances=True)


# gap reports --------------------------------------------------------------


@dataclass(frozen=True)
class GapReport:
    params: Parameters
    m: float
    lhs: float
    rhs: float
    gap: float
    pointwise_ok: bool
    lhs_error: float = 0.0
    rhs_error: float = 0.0
    min_slack: Optional[float] = None


def gap_report(params: Parameters, m: float, spec: QuadratureSpec = DEFAULT_SPEC, grid_n: int = 50) -> GapReport:
    """Both sides of the key inequality plus the pointwise slack on a grid."""
    lhs, rhs = key_integrals(params, m, spec)
    min_slack = None
    ok = False
    if params.q <= _exponent(params):
        x = 1.0 - np.geomspace(1.0, 1e-6, grid_n)[1:]
        x = np.concatenate([x, np.linspace(0.0, 1.0, grid_n + 2)[1:-1]])
        min_slack = float(np.min(pointwise_inequality(params, m, x)))
        ok = min_slack >= -SLACK_TOL
    return GapReport(
        params=params,
        m=float(m),
        lhs=lhs.value,
        rhs=rhs.value,
        gap=lhs.value - rhs.value,
        pointwise_ok=ok,
        lhs_error=lhs.error_estimate,
        rhs_error=rhs.error_estimate,
        min_slack=min_slack,
    )


def integrand_negativity_scan(params: Parameters, m: float, grid_n: int = 4096) -> Optional[float]:
    """Smallest grid point where the key integrand is negative, else ``None``.

    The grid accumulates geometrically at ``x = 1``, where the sign change
    happens when ``q > rp + r - 1``.
    """
    if not 0.0 < m < 1.0:
        raise DomainError(f"m must lie in (0, 1), got {m}")
    lhs, rhs = key_integrands(params, m)
    d = np.concatenate([np.linspace(1.0, 0.5, grid_n // 4, endpoint=False), np.geomspace(0.5, 1e-12, grid_n - grid_n // 4)])
    x = 1.0 - d
    keep = x > 0.0
    x, d = x[keep], d[keep]
    f = lhs(x, x, d)
    g = rhs(x, x, d)
    neg = f - g < -1e-13 * np.maximum(np.abs(f), np.abs(g))
    if not neg.any():
        return None
    return float(x[np.argmax(neg)])


# batteries ----------------------------------------------------------------


@dataclass
class BatteryReport:
    name: str
    passed: bool = True
    checks: list = field(default_factory=list)

    def record(self, label: str, ok: bool, **values) -> None:
        self.checks.append({"check": label, "ok": bool(ok), **values})
        self.passed = self.passed and bool(ok)

    def as_dict(self) -> dict:
        return {"suite": self.name, "passed": self.passed, "checks": self.checks}


def m_grid(n: int = 25) -> np.ndarray:
    return np.linspace(0.0, 1.0, n + 2)[1:-1]


def symmetry_battery(params: Parameters, spec: QuadratureSpec = DEFAULT_SPEC, m_points: int = 25) -> BatteryReport:
    """Key inequality and its pointwise reduction on an ``m`` grid."""
    rep = BatteryReport("symmetry")
    if params.q > _exponent(params):
        rep.record("regime", False, reason="q exceeds (2r-1)p; the symmetry suite does not apply")
        return rep
    for m in m_grid(m_points):
        g = gap_report(params, float(m), spec)
        rep.record("key_gap", g.gap > 0.0 and g.pointwise_ok, m=float(m), gap=g.gap, min_slack=g.min_slack)
        rep.record(
            "terminal_identity",
            terminal_identity_residual(params.p, params.q, params.r, float(m)) <= SLACK_TOL,
            m=float(m),
            residual=terminal_identity_residual(params.p, params.q, params.r, float(m)),
        )
    return rep


def identities_battery(params: Parameters, seed: int = 0, samples: int = 200) -> BatteryReport:
    """Terminal identity and monotonicity lemmas on random samples."""
    rep = BatteryReport("identities")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        p, q, r = rng.uniform(1.1, 5.0), rng.uniform(1.1, 20.0), rng.uniform(1.1, 4.0)
        m = rng.uniform(0.01, 0.99)
        worst = max(worst, terminal_identity_residual(p, q, r, m))
    rep.record("terminal_identity_random", worst <= SLACK_TOL, max_residual=worst)
    a = rng.uniform(0.05, 8.0, samples // 4)
    b = a + rng.uniform(0.01, 12.0, samples // 4)
    rep.record("phi_monotone", all(phi_monotone(x, y) for x, y in zip(a, b)), samples=len(a))
    rep.record("psi_monotone", all(psi_monotone(x, y) for x, y in zip(a, b)), samples=len(a))
    A = _exponent(params)
    rep.record("lemma_psi_instance", psi_monotone(params.r - 1.0, A - (params.r - 1.0)) if A > 2 * (params.r - 1.0) else True)
    if params.q <= A:
        rep.record("lemma_phi_instance", phi_monotone(A - params.q, A))
    return rep

"""The oval-area function J(mu), its derivative, and its minimization.

``J(mu) = int_{x1}^{x2} (1 + mu |x|^(r-2) x - |x|^q)^(1/p*) dx`` over the two
roots closest to the origin.  Rescaling each half-interval to ``[0, 1]``
(``x = x2 t`` and ``x = x1 t``) and eliminating ``mu`` through the root
equations turns the radicand into

    K(c, t) = (1 - t^(r-1)) + c t^(r-1) (1 - t^(q-r+1)),

with ``c = x2^q`` on the right half and ``c = |x1|^q`` on the left.  ``K``
vanishes at ``t = 1`` identically, and both brackets are evaluated from the
exact distance ``1 - t`` supplied by the quadrature, so the ``-1/p`` endpoint
singularity of ``J'`` is integrated without cancellation.

The optimal Wirtinger constant is ``prefactor * min J`` and the Poincare
constant is ``prefactor * J(0)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._numerics import one_minus_pow
from .errors import BoundaryWarning, DomainError, ExtrapolationWarning
from .params import Parameters
from .quad import DEFAULT_SPEC, QuadratureSpec, integrate, integrate_batch
from .roots import domain_contains, shape_R, solve_roots

SCAN_NODES = 64
MU_TOL = 1e-8
INTERIOR_TOL = 1e-6
MAX_WINDOW_DOUBLINGS = 3
# J values closer than this (relative) are indistinguishable from J(0)
TIE_REL_TOL = 1e-13

_GOLDEN = 0.5 * (math.sqrt(5.0) - 1.0)


@dataclass(frozen=True)
class JSample:
    mu: float
    j: float
    j_prime: Optional[float]
    quad_error: float


@dataclass(frozen=True)
class MinimizationResult:
    mu_star: float
    j_min: float
    j_at_zero: float
    interior: bool
    lambda_w: float
    lambda_p: float
    mu_max: float = 10.0


def _radicand(params: Parameters, c, t, d):
    """K(c, t) with ``d = 1 - t`` exact; ``c`` broadcasts against ``t``."""
    a = params.r - 1.0
    b = params.q - params.r + 1.0
    near = t > 0.5
    out = np.empty(np.broadcast(c, t).shape)
    tn, dn = t[near], d[near]
    ta = tn**a
    out[..., near] = one_minus_pow(dn, a) + c * ta * one_minus_pow(dn, b)
    tf = t[~near]
    tfa = tf**a
    out[..., ~near] = (1.0 - tfa) + c * (tfa - tf**params.q)
    return out


def _half_integrals(params: Parameters, c, spec, kind):
    """Integrate over [0, 1] for each coefficient in ``c`` (1-d array)."""
    c = np.asarray(c, dtype=float)[:, None]
    inv_pstar = 1.0 / params.p_star
    inv_p = 1.0 / params.p
    a = params.r - 1.0

    if kind == "j":
        def f(t, da, db):
            return _radicand(params, c, t, db) ** inv_pstar
    else:
        def f(t, da, db):
            return t**a * _radicand(params, c, t, db) ** -inv_p

    return integrate_batch(f, 0.0, 1.0, spec, endpoint_distances=True)


def _roots_for(params: Parameters, mus):
    pairs = []
    for mu in mus:
        if not domain_contains(params, mu):
            raise DomainError(f"mu={mu} lies outside the admissible set for q={params.q}, r={params.r}")
        pairs.append(solve_roots(params, abs(mu)))
    return pairs


def j_values(params: Parameters, mus, spec: QuadratureSpec = DEFAULT_SPEC):
    """Vectorized ``J`` over an array of ``mu`` values (evenness applied).

    Returns ``(values, errors)`` arrays.
    """
    mus = np.atleast_1d(np.asarray(mus, dtype=float))
    pairs = _roots_for(params, mus)
    x2 = np.array([rp.x2 for rp in pairs])
    t1 = np.array([-rp.x1 for rp in pairs])
    res = _half_integrals(params, np.concatenate([x2**params.q, t1**params.q]), spec, "j")
    n = len(mus)
    vals = x2 * res.value[:n] + t1 * res.value[n:]
    errs = x2 * res.error_estimate[:n] + t1 * res.error_estimate[n:]
    return vals, errs


def j_value(params: Parameters, mu: float, spec: QuadratureSpec = DEFAULT_SPEC) -> JSample:
    vals, errs = j_values(params, [mu], spec)
    return JSample(mu=float(mu), j=float(vals[0]), j_prime=None, quad_error=float(errs[0]))


def j_prime(params: Parameters, mu: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Derivative of J from the singular integral with weight ``|x|^(r-2) x``."""
    mu = float(mu)
    if mu < 0.0:
        # J is even, so J' is odd
        return -j_prime(params, -mu, spec)
    (rp,) = _roots_for(params, [mu])
    t1 = -rp.x1
    res = _half_integrals(params, [rp.x2**params.q, t1**params.q], spec, "jp")
    r = params.r
    return float((rp.x2**r * res.value[0] - t1**r * res.value[1]) / params.p_star)


def j_sample(params: Parameters, mu: float, spec: QuadratureSpec = DEFAULT_SPEC) -> JSample:
    """J together with J' at ``mu``."""
    base = j_value(params, mu, spec)
    return JSample(base.mu, base.j, j_prime(params, mu, spec), base.quad_error)


def key_integrands(params: Parameters, m: float):
    """Integrands ``f(t, da, db)`` of the two sides of the key inequality."""
    if not 0.0 < m < 1.0:
        raise DomainError(f"m must lie in (0, 1), got {m}")
    p, q, r = params.p, params.q, params.r
    R = shape_R(m, q, r)
    a = r - 1.0
    inv_p = 1.0 / p
    mq = m**q
    Rma = R * m**a

    def split(t, d):
        near = t > 0.5
        om_a = np.where(near, one_minus_pow(np.where(near, d, 0.0), a), 1.0 - t**a)
        om_q = np.where(near, one_minus_pow(np.where(near, d, 0.0), q), 1.0 - t**q)
        return om_a, om_q

    def lhs(t, da, db):
        om_a, om_q = split(t, db)
        return t**a * (om_q - R * om_a) ** -inv_p

    def rhs(t, da, db):
        om_a, om_q = split(t, db)
        return m**r * t**a * (Rma * om_a + mq * om_q) ** -inv_p

    return lhs, rhs


def key_integrals(params: Parameters, m: float, spec: QuadratureSpec = DEFAULT_SPEC):
    """The two sides of the key inequality as ``(lhs, rhs)`` QuadResults."""
    lhs, rhs = key_integrands(params, m)
    return (
        integrate(lhs, 0.0, 1.0, spec, endpoint_distances=True),
        integrate(rhs, 0.0, 1.0, spec, endpoint_distances=True),
    )


def key_integral_gap(params: Parameters, m: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Left minus right side of the key integral; same sign as ``J'(mu(m))``."""
    lhs, rhs = key_integrals(params, m, spec)
    return lhs.value - rhs.value


def j_second_at_zero(params: Parameters, h: float = 0.05, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Second difference of J at 0, Richardson-extrapolated over ``h, h/2``."""
    if not h > 0.0:
        raise ValueError("h must be positive")
    j0 = j_value(params, 0.0, spec).j

    def second(step):
        jp = j_value(params, step, spec).j
        jm = j_value(params, -step, spec).j
        return (jp - 2.0 * j0 + jm) / step**2

    coarse, fine = second(h), second(0.5 * h)
    value = (4.0 * fine - coarse) / 3.0
    if abs(fine - coarse) > 0.1 * abs(value):
        warnings.warn(
            f"Richardson levels for J''(0) disagree: {coarse:.6g} vs {fine:.6g}",
            ExtrapolationWarning,
            stacklevel=2,
        )
    return value


def _golden(f, lo, hi, tol):
    """Golden-section search on [lo, hi]; returns (x, f(x)) of the best probe."""
    c = hi - _GOLDEN * (hi - lo)
    d = lo + _GOLDEN * (hi - lo)
    fc, fd = f(c), f(d)
    best = (c, fc) if fc <= fd else (d, fd)
    while hi - lo > tol:
        if fc <= fd:
            hi, d, fd = d, c, fc
            c = hi - _GOLDEN * (hi - lo)
            fc = f(c)
            if fc < best[1]:
                best = (c, fc)
        else:
            lo, c, fc = c, d, fd
            d = lo + _GOLDEN * (hi - lo)
            fd = f(d)
            if fd < best[1]:
                best = (d, fd)
    return best


def _scan(params: Parameters, mu_max: float, spec: QuadratureSpec):
    grid = np.linspace(0.0, mu_max, SCAN_NODES)
    inside = np.array([domain_contains(params, mu) for mu in grid])
    vals = np.full(SCAN_NODES, np.inf)
    vals[inside] = j_values(params, grid[inside], spec)[0]
    return grid, vals, inside


def minimize_j(
    params: Parameters,
    mu_max: float = 10.0,
    spec: QuadratureSpec = DEFAULT_SPEC,
    *,
    auto_expand: bool = True,
) -> MinimizationResult:
    """Minimize J over ``[0, mu_max]`` by a grid scan plus golden-section search.

    When the scan minimum sits on ``mu_max`` a ``BoundaryWarning`` is issued
    and, with ``auto_expand``, the window is doubled up to three times.
    The reported minimizer is the best probe found; values within
    ``TIE_REL_TOL`` of ``J(0)`` resolve to ``mu_star = 0``.
    """
    if not mu_max > 0.0:
        raise ValueError("mu_max must be positive")
    for attempt in range(MAX_WINDOW_DOUBLINGS + 1):
        grid, vals, inside = _scan(params, mu_max, spec)
        k = int(np.argmin(vals))
        at_edge = k == SCAN_NODES - 1 or (k + 1 < SCAN_NODES and not inside[k + 1])
        if not at_edge:
            break
        warnings.warn(
            f"minimum of J at the edge of [0, {mu_max:g}] for {params.as_dict()}",
            BoundaryWarning,
            stacklevel=2,
        )
        if not auto_expand or attempt == MAX_WINDOW_DOUBLINGS or not inside.all():
            break
        mu_max *= 2.0

    j0 = float(vals[0])
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, SCAN_NODES - 1)]
    if not inside[min(k + 1, SCAN_NODES - 1)]:
        hi = grid[k]

    def f(mu):
        return float(j_values(params, [mu], spec)[0][0])

    best_mu, best_j = float(grid[k]), float(vals[k])
    if hi > lo:
        cand_mu, cand_j = _golden(f, lo, hi, MU_TOL)
        if cand_j < best_j:
            best_mu, best_j = cand_mu, cand_j
    if best_j >= j0 - TIE_REL_TOL * abs(j0):
        best_mu, best_j = 0.0, j0
    pref = params.prefactor
    return MinimizationResult(
        mu_star=float(best_mu),
        j_min=float(best_j),
        j_at_zero=j0,
        interior=best_mu > INTERIOR_TOL,
        lambda_w=pref * best_j,
        lambda_p=pref * j0,
        mu_max=float(mu_max),
    )

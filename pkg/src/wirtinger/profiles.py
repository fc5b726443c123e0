"""Extremal profiles u_P (Dirichlet, even) and u_W (Neumann, odd) on [-T, T].

Both are built from the single increasing map

    X(u) = int_0^u (1 - s^q)^(-1/p) ds,   0 <= u <= 1,   X(1) = T,

so that ``u_W(x) = sign(x) X^-1(|x|)`` and ``u_P(x) = X^-1(T - |x|)``.
``X`` is tabulated at Chebyshev-spaced nodes; queries start from a monotone
cubic interpolant of the inverse table and are refined by safeguarded Newton
steps using Gauss-Legendre integration from the nearest node.  The last cell
touching ``u = 1`` carries the ``(1 - u)^(-1/p)`` singularity and is handled
in the variable ``z = (1 - u)^(1/p*)``, in which the map is regular.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from ._numerics import one_minus_pow
from .errors import DomainError
from .params import Parameters
from .quad import DEFAULT_SPEC, QuadratureSpec, integrate, integrate_batch

TABLE_NODES = 1025
INVERSE_TOL = 1e-14
_NEWTON_MAX = 12
_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)
_BELOW_ONE = np.nextafter(1.0, 0.0)

PLAIN = "plain"
Q_WEIGHTED = "q_weighted"
GRADIENT_WEIGHTED = "gradient_weighted"
MOMENT_KINDS = (PLAIN, Q_WEIGHTED, GRADIENT_WEIGHTED)


def _one_minus_uq(u, d, q):
    """``1 - u^q`` given ``d = 1 - u``, accurate on both ends."""
    # d = 1 would send log1p to -inf; that branch is discarded anyway
    near = one_minus_pow(np.minimum(d, _BELOW_ONE), q)
    return np.where(u > 0.5, near, 1.0 - u**q)


def _tail(params: Parameters, delta, spec: QuadratureSpec):
    """``Y(delta) = int_{1-delta}^1 (1 - s^q)^(-1/p) ds`` for an array of delta."""
    delta = np.atleast_1d(np.asarray(delta, dtype=float))
    out = np.zeros_like(delta)
    pos = delta > 0.0
    if pos.any():
        dl = delta[pos][:, None]
        q, inv_p = params.q, 1.0 / params.p

        # s = 1 - delta v, so the distance of s from 1 is delta * v = delta * da
        def f(v, da, db):
            return one_minus_pow(np.minimum(dl * da, _BELOW_ONE), q) ** -inv_p

        res = integrate_batch(f, 0.0, 1.0, spec, endpoint_distances=True)
        out[pos] = delta[pos] * res.value
    return out


def quarter_period(params: Parameters, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """``T = int_0^1 (1 - u^q)^(-1/p) du``."""
    q, inv_p = params.q, 1.0 / params.p

    def f(u, da, db):
        return _one_minus_uq(u, db, q) ** -inv_p

    return integrate(f, 0.0, 1.0, spec, endpoint_distances=True).value


@dataclass(frozen=True, eq=False)
class ProfileModel:
    """Tabulated inverse of ``X`` plus evaluators for the profiles."""

    params: Parameters
    T: float
    u_nodes: np.ndarray
    x_nodes: np.ndarray
    spec: QuadratureSpec = DEFAULT_SPEC
    _guess: PchipInterpolator = field(repr=False, default=None)
    _delta_nodes: np.ndarray = field(repr=False, default=None)

    @property
    def inverse_table(self):
        return self.u_nodes, self.x_nodes


def build_model(params: Parameters, spec: QuadratureSpec = DEFAULT_SPEC, nodes: int = TABLE_NODES) -> ProfileModel:
    theta = np.pi * np.arange(nodes) / (nodes - 1)
    u = 0.5 * (1.0 - np.cos(theta))
    delta = 0.5 * (1.0 + np.cos(theta))
    u[-1], delta[-1] = 1.0, 0.0
    T = quarter_period(params, spec)
    x = T - _tail(params, delta, spec)
    x[0], x[-1] = 0.0, T
    if not np.all(np.diff(x) > 0.0):
        raise DomainError("tabulated X(u) is not strictly increasing")
    for arr in (u, x, delta):
        arr.setflags(write=False)
    guess = PchipInterpolator(x, u, extrapolate=False)
    return ProfileModel(params, T, u, x, spec, guess, delta)


def _weight(params: Parameters, s):
    """Integrand ``(1 - s^q)^(-1/p)`` of X."""
    return _one_minus_uq(s, 1.0 - s, params.q) ** (-1.0 / params.p)


def x_of_u(model: ProfileModel, u) -> np.ndarray:
    """Evaluate X(u) for ``u`` in [0, 1] (vectorized)."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    n = len(model.u_nodes)
    k = np.minimum(np.searchsorted(model.u_nodes, u, side="right") - 1, n - 2)
    k = np.maximum(k, 0)
    out = np.empty_like(u)
    last = k == n - 2
    if (~last).any():
        uk = model.u_nodes[k[~last]]
        uu = u[~last]
        half = 0.5 * (uu - uk)
        s = uk[:, None] + half[:, None] * (1.0 + _GL_X)
        out[~last] = model.x_nodes[k[~last]] + half * (_weight(model.params, s) @ _GL_W)
    if last.any():
        out[last] = model.T - _tail(model.params, 1.0 - u[last], model.spec)
    return out


def _tail_inverse(model: ProfileModel, gap):
    """Solve ``Y(delta) = gap`` for delta near 0 by Newton in ``z = delta^(1/p*)``."""
    p, q, ps = model.params.p, model.params.q, model.params.p_star
    lead = ps * q ** (-1.0 / p)
    z_hi = model._delta_nodes[-2] ** (1.0 / ps)
    z = np.clip(gap / lead, 0.0, z_hi)
    active = gap > 0.0
    if not active.all():
        out = np.zeros_like(gap)
        if active.any():
            out[active] = _tail_inverse(model, gap[active])
        return out
    lo = np.zeros_like(z)
    hi = np.full_like(z, z_hi)
    for _ in range(_NEWTON_MAX):
        delta = z**ps
        resid = _tail(model.params, delta, model.spec) - gap
        lo = np.where(resid < 0.0, z, lo)
        hi = np.where(resid > 0.0, z, hi)
        # dY/dz = (1 - (1-delta)^q)^(-1/p) p* z^(p*-1), which tends to lead as z -> 0
        safe = np.where(delta > 0.0, delta, 1.0)
        slope = np.where(delta > 0.0, one_minus_pow(safe, q) ** (-1.0 / p) * ps * safe ** (1.0 / p), lead)
        step = resid / slope
        cand = z - step
        bad = ~((cand > lo) & (cand < hi)) | ~np.isfinite(cand)
        cand = np.where(bad, 0.5 * (lo + hi), cand)
        done = np.abs(cand - z) <= INVERSE_TOL * np.maximum(z, 1e-300)
        z = cand
        if done.all():
            break
    return z**ps


def inverse_x(model: ProfileModel, y) -> np.ndarray:
    """``X^-1(y)`` for ``y`` in [0, T] (vectorized)."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    T = model.T
    y = np.clip(y, 0.0, T)
    n = len(model.u_nodes)
    k = np.clip(np.searchsorted(model.x_nodes, y, side="right") - 1, 0, n - 2)
    u = np.empty_like(y)
    last = k == n - 2
    if last.any():
        u[last] = 1.0 - _tail_inverse(model, T - y[last])
    mid = ~last
    if mid.any():
        ym = y[mid]
        lo = model.u_nodes[k[mid]].copy()
        hi = model.u_nodes[k[mid] + 1].copy()
        cur = np.minimum(np.maximum(model._guess(ym), lo), hi)
        for _ in range(_NEWTON_MAX):
            resid = x_of_u(model, cur) - ym
            lo = np.where(resid < 0.0, cur, lo)
            hi = np.where(resid > 0.0, cur, hi)
            cand = cur - resid / _weight(model.params, cur)
            # fall back to bisection when Newton leaves the bracket
            cand = np.where((cand >= lo) & (cand <= hi), cand, 0.5 * (lo + hi))
            done = np.max(np.abs(cand - cur)) <= INVERSE_TOL
            cur = cand
            if done:
                break
        u[mid] = cur
    u[y >= T] = 1.0
    u[y <= 0.0] = 0.0
    return u


def _check_domain(model: ProfileModel, x):
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > model.T * (1.0 + 1e-14)):
        raise DomainError(f"profile evaluated outside [-T, T] with T={model.T}")
    return x


def _shaped(x, values):
    return float(values[0]) if np.ndim(x) == 0 else values.reshape(np.shape(x))


def eval_u_w(model: ProfileModel, x):
    """Odd, increasing Wirtinger profile with ``u_W(+-T) = +-1``."""
    xa = _check_domain(model, x)
    flat = np.atleast_1d(xa).ravel()
    vals = np.sign(flat) * inverse_x(model, np.abs(flat))
    return _shaped(x, vals)


def eval_u_p(model: ProfileModel, x):
    """Even Poincare profile with ``u_P(0) = 1`` and ``u_P(+-T) = 0``."""
    xa = _check_domain(model, x)
    flat = np.atleast_1d(xa).ravel()
    vals = inverse_x(model, model.T - np.abs(flat))
    return _shaped(x, vals)


def cut_and_paste(model: ProfileModel, x):
    """Assemble the odd profile from two shifted copies of ``u_P``."""
    xa = _check_domain(model, x)
    flat = np.atleast_1d(xa).ravel()
    T = model.T
    neg = flat < 0.0
    out = np.empty_like(flat)
    if neg.any():
        out[neg] = -np.atleast_1d(eval_u_p(model, np.clip(flat[neg] + T, -T, T)))
    if (~neg).any():
        out[~neg] = np.atleast_1d(eval_u_p(model, np.clip(flat[~neg] - T, -T, T)))
    return _shaped(x, out)


def profile_integral(params: Parameters, func, spec: QuadratureSpec = DEFAULT_SPEC, *, weight_power=None):
    """``int_{-T}^{T} func(u_W(y)) |u_W'(y)|^k dy`` via ``y -> u``.

    With ``dy = (1 - u^q)^(-1/p) du`` and ``|u_W'|^p = 1 - |u|^q`` the
    integral becomes ``int_0^1 [func(u) + func(-u)] (1 - u^q)^e du`` where
    ``e = -1/p`` by default, or ``weight_power`` when given.
    """
    e = -1.0 / params.p if weight_power is None else weight_power
    q = params.q

    def f(u, da, db):
        return (func(u) + func(-u)) * _one_minus_uq(u, db, q) ** e

    return integrate(f, 0.0, 1.0, spec, endpoint_distances=True)


def moment_integral(model: ProfileModel, kind: str, s: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Moments of ``u_W`` over [-T, T].

    ``plain``: ``int |u_W|^(2s)``; ``q_weighted``: ``int |u_W|^(q+2s)``;
    ``gradient_weighted``: ``int |u_W'|^p |u_W|^(2s)``.
    """
    if s < 0:
        raise ValueError("s must be nonnegative")
    params = model.params
    if kind == PLAIN:
        expo, weight = 2.0 * s, None
    elif kind == Q_WEIGHTED:
        expo, weight = params.q + 2.0 * s, None
    elif kind == GRADIENT_WEIGHTED:
        expo, weight = 2.0 * s, 1.0 / params.p_star
    else:
        raise ValueError(f"unknown moment kind {kind!r}")
    return profile_integral(params, lambda u: np.abs(u) ** expo, spec, weight_power=weight).value


def verify_moment_identities(model: ProfileModel, s: float, spec: QuadratureSpec = DEFAULT_SPEC):
    """Residuals of the two power-integral identities at exponent ``s``."""
    ps, q = model.params.p_star, model.params.q
    plain = moment_integral(model, PLAIN, s, spec)
    qw = moment_integral(model, Q_WEIGHTED, s, spec)
    gw = moment_integral(model, GRADIENT_WEIGHTED, s, spec)
    k = (2.0 * s + 1.0) * ps
    return abs(plain - (k + q) / k * qw), abs(plain - (k + q) / q * gw)


def rayleigh_quotient_odd(model: ProfileModel, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """``(2T)^theta ||u_W'||_p / ||u_W||_q``, the odd candidate's quotient."""
    params = model.params
    grad = moment_integral(model, GRADIENT_WEIGHTED, 0.0, spec)
    norm = moment_integral(model, Q_WEIGHTED, 0.0, spec)
    return (2.0 * model.T) ** params.theta * grad ** (1.0 / params.p) / norm ** (1.0 / params.q)


def first_integral_residual(model: ProfileModel, x, step: float = 1e-5) -> np.ndarray:
    """``|u_W'|^p + |u_W|^q - 1`` with ``u_W'`` from central differences."""
    x = np.asarray(x, dtype=float)
    up = eval_u_w(model, x + step)
    um = eval_u_w(model, x - step)
    deriv = (np.asarray(up) - np.asarray(um)) / (2.0 * step)
    u = np.asarray(eval_u_w(model, x))
    return np.abs(deriv) ** model.params.p + np.abs(u) ** model.params.q - 1.0

"""Brute-force minimization of the discretized Rayleigh quotient on [-1, 1].

Nodal values ``u_0..u_n`` on a uniform grid.  The gradient norm uses the
piecewise-constant slopes on cells (midpoint rule), the ``q``-norm uses the
trapezoid rule on nodes and the constraint is the midpoint rule of
``|u|^(r-2) u``.  Feasibility is restored after every step by the unique
scalar shift that zeroes the constraint, followed by ``q``-normalization.

The descent direction comes from coordinate-wise central differences of the
local cell contributions, reduced along the projecting shift and smoothed by
the discrete ``H^1`` Riesz map so that the step size does not collapse as the
grid is refined.  Only steps that
lower the projected quotient are accepted.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded
from scipy.optimize import brentq

from .errors import DegenerateError
from .params import Parameters

PROJECTION_TOL = 1e-12
NORM_FLOOR = 1e-14
FD_STEP = 1e-7
DEFAULT_ITERS = 400
AMPLITUDES = (0.0, 0.2, 0.5)
_MAX_BACKTRACK = 40


@dataclass(eq=False)
class DiscreteProblem:
    n: int
    nodes: np.ndarray
    u: np.ndarray
    constraint_r: float

    @classmethod
    def on_grid(cls, n: int, u, r: float) -> "DiscreteProblem":
        nodes = np.linspace(-1.0, 1.0, n + 1)
        values = u(nodes) if callable(u) else np.asarray(u, dtype=float)
        if values.shape != nodes.shape:
            raise ValueError(f"expected {n + 1} nodal values, got {values.shape}")
        return cls(n, nodes, np.array(values, dtype=float), float(r))

    @property
    def h(self) -> float:
        return 2.0 / self.n


def _trap_weights(n: int) -> np.ndarray:
    w = np.full(n + 1, 2.0 / n)
    w[0] = w[-1] = 1.0 / n
    return w


def _phi(v, r):
    a = np.abs(v)
    return np.where(a > 0.0, np.where(a > 0.0, a, 1.0) ** (r - 2.0) * v, 0.0)


def constraint_residual(u, r: float) -> float:
    """Midpoint rule of ``|u|^(r-2) u`` over [-1, 1]."""
    u = np.asarray(u, dtype=float)
    h = 2.0 / (len(u) - 1)
    return float(h * np.sum(_phi(0.5 * (u[:-1] + u[1:]), r)))


def q_norm(u, q: float) -> float:
    u = np.asarray(u, dtype=float)
    return float(_trap_weights(len(u) - 1) @ np.abs(u) ** q) ** (1.0 / q)


def _energies(u, p, q, h, w):
    s = np.diff(u) / h
    return h * np.sum(np.abs(s) ** p), w @ np.abs(u) ** q


def _quotient_from(u, params: Parameters, h, w):
    ep, eq = _energies(u, params.p, params.q, h, w)
    if eq ** (1.0 / params.q) < NORM_FLOOR:
        raise DegenerateError("the q-norm vanishes; the quotient is undefined")
    return 2.0**params.theta * ep ** (1.0 / params.p) / eq ** (1.0 / params.q)


def discrete_quotient(prob: DiscreteProblem, params: Parameters) -> float:
    """``2^theta ||u'||_p / ||u||_q`` on the grid."""
    return _quotient_from(prob.u, params, prob.h, _trap_weights(prob.n))


def project_constraint(u, r: float) -> np.ndarray:
    """Shift ``u`` by the unique constant that zeroes the constraint."""
    u = np.asarray(u, dtype=float)
    lo, hi = float(np.min(u)), float(np.max(u))
    if not hi > lo:
        raise DegenerateError("cannot project a constant vector onto the constraint")
    mid = 0.5 * (u[:-1] + u[1:])
    h = 2.0 / (len(u) - 1)

    def resid(c):
        return h * np.sum(_phi(mid - c, r))

    f_lo, f_hi = resid(lo), resid(hi)
    if f_lo == 0.0:
        return u - lo
    if f_hi == 0.0:
        return u - hi
    c = brentq(resid, lo, hi, xtol=PROJECTION_TOL * max(1.0, abs(lo), abs(hi)), rtol=4 * np.finfo(float).eps)
    return u - c


def _feasible(u, params: Parameters):
    v = project_constraint(u, params.r)
    nrm = q_norm(v, params.q)
    if nrm < NORM_FLOOR:
        raise DegenerateError("projection produced the zero function")
    return v / nrm


def _local_gradient(u, params: Parameters, h, w):
    """Central differences of the quotient in each nodal value.

    Node ``i`` only enters the two neighbouring cells and its own trapezoid
    weight, so all coordinates are perturbed at once through their local
    contributions.
    """
    p, q = params.p, params.q
    ep, eq = _energies(u, p, q, h, w)
    d = FD_STEP * max(1.0, float(np.max(np.abs(u))))
    left = np.zeros_like(u)
    right = np.zeros_like(u)
    left[1:] = u[1:] - u[:-1]
    right[:-1] = u[1:] - u[:-1]

    def cells(delta):
        # gradient-energy change of the two cells touching each node
        out = np.zeros_like(u)
        out[1:] += np.abs((left[1:] + delta) / h) ** p - np.abs(left[1:] / h) ** p
        out[:-1] += np.abs((right[:-1] - delta) / h) ** p - np.abs(right[:-1] / h) ** p
        return h * out

    dep = (cells(d) - cells(-d)) / (2.0 * d)
    deq = w * (np.abs(u + d) ** q - np.abs(u - d) ** q) / (2.0 * d)
    Q = 2.0**params.theta * ep ** (1.0 / p) / eq ** (1.0 / q)
    return Q * (dep / (p * ep) - deq / (q * eq))


def _constraint_gradient(u, r: float, h: float):
    """Gradient of the midpoint constraint in the nodal values."""
    mid = 0.5 * (u[:-1] + u[1:])
    a = np.abs(mid)
    dphi = (r - 1.0) * np.maximum(a, np.finfo(float).tiny) ** (r - 2.0)
    out = np.zeros_like(u)
    out[:-1] += 0.5 * h * dphi
    out[1:] += 0.5 * h * dphi
    return out


def _reduced_gradient(u, params: Parameters, h, w):
    """Gradient of ``v -> Q(v - c(v))`` with ``c`` the projecting shift.

    Differentiating the constraint gives ``dc = (a . dv) / (a . 1)``.
    """
    g = _local_gradient(u, params, h, w)
    a = _constraint_gradient(u, params.r, h)
    return g - (np.sum(g) / np.sum(a)) * a


def _riesz_bands(n: int, h: float):
    """Banded form of stiffness plus lumped mass (natural boundary)."""
    main = np.full(n + 1, 2.0 / h) + _trap_weights(n)
    main[0] = main[-1] = 1.0 / h + 1.0 / n
    off = np.full(n, -1.0 / h)
    ab = np.zeros((3, n + 1))
    ab[0, 1:] = off
    ab[1] = main
    ab[2, :-1] = off
    return ab


@dataclass
class StartResult:
    amplitude: float
    quotient: float
    iterations: int
    history: list = field(default_factory=list)


@dataclass(eq=False)
class OracleResult:
    lambda_est: float
    u_best: np.ndarray
    nodes: np.ndarray
    starts: list

    def __iter__(self):
        yield self.lambda_est
        yield self.u_best


def descend(u0, params: Parameters, iters: int = DEFAULT_ITERS, rel_tol: float = 1e-13):
    """Projected preconditioned descent from ``u0``; returns ``(u, history)``."""
    n = len(u0) - 1
    h = 2.0 / n
    w = _trap_weights(n)
    bands = _riesz_bands(n, h)
    u = _feasible(u0, params)
    Q = _quotient_from(u, params, h, w)
    history = [Q]
    step = 1.0
    for _ in range(iters):
        g = _reduced_gradient(u, params, h, w)
        direction = -solve_banded((1, 1), bands, g)
        accepted = False
        for _ in range(_MAX_BACKTRACK):
            try:
                cand = _feasible(u + step * direction, params)
                Qc = _quotient_from(cand, params, h, w)
            except DegenerateError:
                Qc = np.inf
            if Qc < Q:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        gain = Q - Qc
        u, Q = cand, Qc
        history.append(Q)
        step *= 2.0
        if gain <= rel_tol * Q:
            break
    return u, history


def _start_profile(params: Parameters, n: int, amplitude: float, rng):
    from .profiles import build_model, eval_u_w

    model = build_model(params)
    x = np.linspace(-1.0, 1.0, n + 1)
    base = np.asarray(eval_u_w(model, np.clip(model.T * x, -model.T, model.T)))
    if amplitude == 0.0:
        return base
    # even tilt built from a few low modes with random weights
    modes = np.stack([np.cos(np.pi * x), x**2 - 1.0 / 3.0, np.cos(2.0 * np.pi * x), np.sin(np.pi * x / 2.0)])
    coef = rng.normal(size=len(modes))
    tilt = coef @ modes
    tilt /= np.max(np.abs(tilt))
    return base + amplitude * tilt


def minimize_rayleigh(
    params: Parameters,
    n: int = 400,
    starts: int = 3,
    iters: int = DEFAULT_ITERS,
    seed: int = 0,
) -> OracleResult:
    """Multi-start projected descent; returns the smallest quotient found."""
    if n < 50:
        raise ValueError("n must be at least 50")
    if starts < 1:
        raise ValueError("starts must be positive")
    rng = np.random.default_rng(seed)
    best_u, best_q = None, np.inf
    results = []
    for k in range(starts):
        amp = AMPLITUDES[k % len(AMPLITUDES)]
        u0 = _start_profile(params, n, amp, rng)
        u, hist = descend(u0, params, iters)
        results.append(StartResult(amp, float(hist[-1]), len(hist) - 1, [float(v) for v in hist]))
        if hist[-1] < best_q:
            best_q, best_u = hist[-1], u
    return OracleResult(float(best_q), best_u, np.linspace(-1.0, 1.0, n + 1), results)


def richardson(values, ns) -> float:
    """Extrapolate ``lambda(n)`` assuming an ``n^-2`` leading error."""
    (a, b), (na, nb) = values[-2:], ns[-2:]
    ratio = (nb / na) ** 2
    return (ratio * b - a) / (ratio - 1.0)

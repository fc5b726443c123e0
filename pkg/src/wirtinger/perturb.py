"""Second-order perturbation of the odd profile ``u_W`` along a variable change.

With ``phi(u) = |u|^(r-2) u`` the flow ``y' = 1 + eps phi(u_W(y))``, ``y(0) = 0``,
is run until ``y = -T`` and ``y = T``; the stopping times define the new
interval ``[a_eps, b_eps]`` and the competitor is

    u_eps(x) = y'(x)^(1/(r-1)) u_W(y(x)),

which keeps the integral constraint.  Its quotient behaves like
``Q(0) (1 + (I0/J0) Gamma eps^2)``, so the sign of ``Gamma`` decides whether
``u_W`` is a local minimizer.  All integrals are evaluated in the profile
variable ``u = u_W(y)``, where ``dy = (1 - |u|^q)^(-1/p) du``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConstraintError, FitError, IdentityError, StepError
from .params import Parameters
from .profiles import ProfileModel, inverse_x, moment_integral, profile_integral, GRADIENT_WEIGHTED, Q_WEIGHTED
from .quad import DEFAULT_SPEC, QuadratureSpec

DEFAULT_EPS = (0.02, 0.01, 0.005)
STEPS_PER_HALF = 2048
ZERO_HALVINGS = 8
EVENT_TOL = 1e-12
IDENTITY_TOL = 1e-7
CONSTRAINT_TOL = 1e-8
PSI_STEP = 1e-5
ODD_RATIO = 0.1
_GL5_X, _GL5_W = np.polynomial.legendre.leggauss(5)


def gamma_optimal(params: Parameters) -> float:
    """Second-order coefficient for the optimal flow (up to the factor I0/J0)."""
    p, q, r, ps = params.p, params.q, params.r, params.p_star
    k = 2.0 * r - 1.0
    return -k / (2.0 * (r - 1.0) ** 2) * (ps + q) / (k * ps + q) * (q - k * p)


def gamma_piecewise(params: Parameters) -> float:
    """Second-order coefficient for the two-branch affine rescaling."""
    p, q, r = params.p, params.q, params.r
    return -(q - r * r * p + (r - 1.0) ** 2) / (2.0 * (r - 1.0) ** 2)


def gammas(params: Parameters):
    """``(gamma1, gamma21, gamma22, gamma23)``."""
    p, q, r = params.p, params.q, params.r
    a = r - 1.0
    g1 = q / (2.0 * a * a) - 1.5 / a + 1.0 / q
    g21 = r * r * p / (2.0 * a * a) - 1.5 * r / a + 1.0 / p
    g22 = (p - 1.0) / (2.0 * a * a)
    g23 = r * p / (a * a) - 2.0 / a
    return g1, g21, g22, g23


@dataclass(frozen=True)
class PerturbationCoefficients:
    gamma1: float
    gamma21: float
    gamma22: float
    gamma23: float
    I0: float
    J0: float
    I1: float
    J1: float
    I21: float
    I22: float
    I23: float
    J2: float
    Gamma: float
    max_discrepancy: float

    @property
    def c_predicted(self) -> float:
        """Predicted ``eps^2`` coefficient of ``Q(eps)/Q(0)``."""
        return self.I0 / self.J0 * self.Gamma

    @property
    def length_coefficient(self) -> float:
        return self.I0

    @property
    def norm_q_coefficient(self) -> float:
        return self.I1 / self.J1 * self.gamma1

    @property
    def norm_p_coefficient(self) -> float:
        return (self.I21 * self.gamma21 + self.I22 * self.gamma22 + self.I23 * self.gamma23) / self.J2


def phi(u, r: float):
    u = np.asarray(u, dtype=float)
    a = np.abs(u)
    # phi(0) = 0 also when r < 2
    return np.where(a > 0.0, np.where(a > 0.0, a, 1.0) ** (r - 2.0) * u, 0.0)


def psi_numeric(u, r: float, h: float = PSI_STEP):
    """``u dphi/du`` by a central difference in ``log|u|``."""
    u = np.asarray(u, dtype=float)
    return (phi(u * math.exp(h), r) - phi(u * math.exp(-h), r)) / (2.0 * h)


def coefficients(params: Parameters, model: ProfileModel, spec: QuadratureSpec = DEFAULT_SPEC) -> PerturbationCoefficients:
    """Moment integrals by closed-form ratios and by direct quadrature.

    Raises ``IdentityError`` when the two routes differ by more than
    ``IDENTITY_TOL`` (relative).
    """
    p, q, r, ps = params.p, params.q, params.r, params.p_star
    k = 2.0 * r - 1.0
    s = r - 1.0
    I0 = moment_integral(model, "plain", s, spec)
    J0 = 2.0 * model.T
    closed = {
        "I1": k * ps / (k * ps + q) * I0,
        "J1": ps / (ps + q) * J0,
        "I21": q / (k * ps + q) * I0,
        "J2": q / (ps + q) * J0,
    }
    closed["I22"] = s * s * closed["I21"]
    closed["I23"] = s * closed["I21"]

    grad = 1.0 / ps

    def grad_int(func):
        return profile_integral(params, func, spec, weight_power=grad).value

    direct = {
        "I1": moment_integral(model, Q_WEIGHTED, s, spec),
        "J1": moment_integral(model, Q_WEIGHTED, 0.0, spec),
        "I21": moment_integral(model, GRADIENT_WEIGHTED, s, spec),
        "J2": moment_integral(model, GRADIENT_WEIGHTED, 0.0, spec),
        "I22": grad_int(lambda u: psi_numeric(u, r) ** 2),
        "I23": grad_int(lambda u: phi(u, r) * psi_numeric(u, r)),
    }
    worst = max(abs(direct[key] - closed[key]) / abs(closed[key]) for key in closed)
    if worst > IDENTITY_TOL:
        raise IdentityError(f"moment identities fail with relative discrepancy {worst:.3e}")
    g1, g21, g22, g23 = gammas(params)
    brace = -k * g1 + g21 + s * s * g22 + s * g23
    Gamma = params.theta + (ps + q) / (k * ps + q) * brace
    return PerturbationCoefficients(
        gamma1=g1, gamma21=g21, gamma22=g22, gamma23=g23,
        I0=I0, J0=J0, I1=closed["I1"], J1=closed["J1"],
        I21=closed["I21"], I22=closed["I22"], I23=closed["I23"], J2=closed["J2"],
        Gamma=Gamma, max_discrepancy=worst,
    )


# flow ---------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FlowState:
    """Trajectory of the variable change on ``[a_eps, b_eps]`` (ascending x)."""

    epsilon: float
    a_eps: float
    b_eps: float
    x: np.ndarray
    y: np.ndarray
    T: float

    @property
    def length(self) -> float:
        return self.b_eps - self.a_eps


def _rhs(model: ProfileModel, eps, y):
    # beyond +-T the right-hand side is continued by its endpoint value
    T = model.T
    yc = np.minimum(np.maximum(y, -T), T)
    u = np.sign(yc) * inverse_x(model, np.abs(yc))
    return 1.0 + eps * phi(u, model.params.r)


def _rk4(model, eps, y, h):
    k1 = _rhs(model, eps, y)
    k2 = _rhs(model, eps, y + 0.5 * h * k1)
    k3 = _rhs(model, eps, y + 0.5 * h * k2)
    k4 = _rhs(model, eps, y + h * k3)
    return y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _step_sizes(h: float, n: int):
    """Steps graded towards the origin, then constant."""
    small = [h * 2.0**-ZERO_HALVINGS]
    small += [h * 2.0 ** -(ZERO_HALVINGS - j) for j in range(ZERO_HALVINGS)]
    return small + [h] * n


def _localize(model, eps: float, y0: float, h: float, target: float) -> float:
    """Bisection for the partial step ``tau`` with ``RK4(y0, tau) = target``."""
    sgn = math.copysign(1.0, h)
    e = np.array([eps])

    def over(tau):
        return sgn * (_rk4(model, e, np.array([y0]), tau)[0] - target) >= 0.0

    lo, hi = 0.0, h
    if not over(hi):
        raise StepError(f"no crossing of y={target} inside the step from y={y0}")
    for _ in range(200):
        if abs(hi - lo) <= EVENT_TOL:
            break
        mid = 0.5 * (lo + hi)
        if over(mid):
            hi = mid
        else:
            lo = mid
    else:
        raise StepError(f"event localization at y={target} did not converge")
    return 0.5 * (lo + hi)


def _half_flow(model: ProfileModel, eps: np.ndarray, h: float):
    """Integrate all flows in ``eps`` from 0 until ``y`` reaches ``sign(h) T``."""
    T = model.T
    target = math.copysign(T, h)
    sgn = math.copysign(1.0, h)
    worst = 1.0 - float(np.max(np.abs(eps))) if len(eps) else 1.0
    n_max = int(math.ceil(T / (worst * abs(h)))) + 4
    steps = _step_sizes(h, n_max)
    m = len(eps)
    y = np.zeros(m)
    x = 0.0
    xs, ys = [0.0], [y.copy()]
    stop = np.full(m, np.nan)
    active = np.ones(m, dtype=bool)
    for step in steps:
        if not active.any():
            break
        y_new = y.copy()
        y_new[active] = _rk4(model, eps[active], y[active], step)
        if not np.all(np.isfinite(y_new)):
            raise StepError("non-finite state in the flow")
        crossed = active & (sgn * (y_new - target) >= 0.0)
        for i in np.nonzero(crossed)[0]:
            tau = _localize(model, float(eps[i]), float(y[i]), step, target)
            stop[i] = x + tau
        active &= ~crossed
        x += step
        y = y_new
        xs.append(x)
        ys.append(y.copy())
    if active.any():
        raise StepError(f"flow did not reach y={target} within {len(steps)} steps")
    return np.array(xs), np.array(ys), stop


def flows(model: ProfileModel, eps_list, step: float | None = None):
    """Run one flow per value in ``eps_list`` in lockstep (vectorized)."""
    eps = np.asarray(eps_list, dtype=float)
    if np.any(np.abs(eps) >= 1.0) or not np.all(np.isfinite(eps)):
        raise ValueError("every epsilon must satisfy |epsilon| < 1")
    h = model.T / STEPS_PER_HALF if step is None else float(step)
    if not h > 0.0:
        raise ValueError("step must be positive")
    T = model.T
    states = [None] * len(eps)
    moving = np.nonzero(eps != 0.0)[0]
    if len(moving):
        xf, yf, bs = _half_flow(model, eps[moving], h)
        xb, yb, as_ = _half_flow(model, eps[moving], -h)
        for j, i in enumerate(moving):
            a, b = as_[j], bs[j]
            keep_b = xf < b
            keep_a = xb[1:] > a
            x = np.concatenate([[a], xb[1:][keep_a][::-1], xf[keep_b], [b]])
            y = np.concatenate([[-T], yb[1:, j][keep_a][::-1], yf[keep_b, j], [T]])
            states[i] = FlowState(float(eps[i]), float(a), float(b), x, y, T)
    for i in np.nonzero(eps == 0.0)[0]:
        grid = np.linspace(-T, T, 2 * STEPS_PER_HALF + 1)
        states[i] = FlowState(0.0, -T, T, grid, grid.copy(), T)
    return states


def flow(model: ProfileModel, epsilon: float, step: float | None = None) -> FlowState:
    """Integrate ``y' = 1 + eps phi(u_W(y))`` both ways from ``y(0) = 0``."""
    return flows(model, [epsilon], step)[0]


# quotient -----------------------------------------------------------------


@dataclass(frozen=True)
class PerturbedQuotient:
    epsilon: float
    length: float
    length_quadrature: float
    norm_q: float
    norm_p: float
    constraint: float
    quotient: float


def _g(u, eps, r):
    return 1.0 + eps * phi(u, r)


def _constraint_along(model: ProfileModel, state: FlowState) -> float:
    """``int |u_eps|^(r-2) u_eps dx`` along the sampled trajectory.

    Each step is interpolated by the cubic Hermite polynomial through the
    endpoint values and slopes of ``y`` and integrated with 5-point
    Gauss-Legendre.
    """
    eps, r, T = state.epsilon, model.params.r, model.T
    x, y = state.x, state.y

    def slope(yy):
        yc = np.clip(yy, -T, T)
        return _g(np.sign(yc) * inverse_x(model, np.abs(yc)), eps, r)

    s = slope(y)
    hx = np.diff(x)
    t = 0.5 * (1.0 + _GL5_X)
    h00 = 2 * t**3 - 3 * t**2 + 1
    h10 = t**3 - 2 * t**2 + t
    h01 = -2 * t**3 + 3 * t**2
    h11 = t**3 - t**2
    yy = (np.outer(y[:-1], h00) + np.outer(hx * s[:-1], h10) + np.outer(y[1:], h01) + np.outer(hx * s[1:], h11))
    yc = np.clip(yy.ravel(), -T, T)
    u = np.sign(yc) * inverse_x(model, np.abs(yc))
    # |u_eps|^(r-2) u_eps = g phi(u_W(y))
    f = (_g(u, eps, r) * phi(u, r)).reshape(yy.shape)
    return float(np.sum(0.5 * hx * (f @ _GL5_W)))


def perturbed_components(model: ProfileModel, state: FlowState, spec: QuadratureSpec = DEFAULT_SPEC) -> PerturbedQuotient:
    """Length, norms, constraint and quotient of ``u_eps``."""
    params = model.params
    p, q, r = params.p, params.q, params.r
    eps = state.epsilon
    Lq = profile_integral(params, lambda u: 1.0 / _g(u, eps, r), spec).value
    nq = profile_integral(params, lambda u: np.abs(u) ** q * _g(u, eps, r) ** (q / (r - 1.0) - 1.0), spec).value

    def grad(u):
        return np.abs(1.0 + 2.0 * eps * phi(u, r)) ** p * _g(u, eps, r) ** ((p - r + 1.0) / (r - 1.0))

    np_ = profile_integral(params, grad, spec, weight_power=1.0 / params.p_star).value
    constraint = _constraint_along(model, state) if eps != 0.0 else 0.0
    if abs(constraint) > CONSTRAINT_TOL:
        raise ConstraintError(f"integral constraint violated by {constraint:.3e} at eps={eps}")
    L = state.length
    Q = L**params.theta * np_ ** (1.0 / p) / nq ** (1.0 / q)
    return PerturbedQuotient(eps, L, Lq, nq ** (1.0 / q), np_ ** (1.0 / p), constraint, Q)


def perturbed_quotient(model: ProfileModel, state: FlowState, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """``(b-a)^theta ||u_eps'||_p / ||u_eps||_q``."""
    return perturbed_components(model, state, spec).quotient


# fits ---------------------------------------------------------------------


def fit_second_order(eps, q_plus, q_minus, q0: float) -> float:
    """Least-squares ``c`` in ``Q(eps)/Q(0) = 1 + c eps^2 + d eps^4``.

    ``q_plus`` and ``q_minus`` hold ``Q(eps)`` and ``Q(-eps)``.  Raises
    ``FitError`` when the odd part is not negligible against ``c eps^2``.
    """
    eps = np.asarray(eps, dtype=float)
    if len(eps) < 3 or not np.all(np.diff(eps) < 0.0) or eps[-1] <= 0.0:
        raise ValueError("need at least three decreasing positive epsilons")
    qp = np.asarray(q_plus, dtype=float)
    qm = np.asarray(q_minus, dtype=float)
    even = 0.5 * (qp + qm) / q0 - 1.0
    odd = 0.5 * (qp - qm) / q0
    basis = np.column_stack([eps**2, eps**4])
    (c, _), *_ = np.linalg.lstsq(basis, even, rcond=None)
    scale = np.maximum(abs(c) * eps**2, 1e-10)
    if np.any(np.abs(odd) > ODD_RATIO * scale):
        raise FitError(f"odd part {np.max(np.abs(odd)):.3e} is not negligible; expected an even expansion")
    return float(c)


@dataclass(frozen=True)
class SecondOrderFit:
    eps_list: tuple
    q0: float
    q_plus: tuple
    q_minus: tuple
    fitted_c: float
    predicted_c: float

    @property
    def relative_error(self) -> float:
        if self.predicted_c == 0.0:
            return abs(self.fitted_c)
        return abs(self.fitted_c - self.predicted_c) / abs(self.predicted_c)


def second_order_fit(model: ProfileModel, eps_list=DEFAULT_EPS, spec: QuadratureSpec = DEFAULT_SPEC) -> SecondOrderFit:
    """Quotients along the flow for ``+-eps`` and the fitted ``eps^2`` coefficient."""
    eps = np.asarray(eps_list, dtype=float)
    states = flows(model, np.concatenate([eps, -eps]))
    vals = [perturbed_quotient(model, st, spec) for st in states]
    q0 = perturbed_quotient(model, flow(model, 0.0), spec)
    n = len(eps)
    c = fit_second_order(eps, vals[:n], vals[n:], q0)
    coeff = coefficients(model.params, model, spec)
    return SecondOrderFit(tuple(eps), q0, tuple(vals[:n]), tuple(vals[n:]), c, coeff.c_predicted)


def fd_second_coefficient(model: ProfileModel, eps_list=DEFAULT_EPS, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Fitted ``eps^2`` coefficient of ``Q(eps)/Q(0)`` along the optimal flow."""
    return second_order_fit(model, eps_list, spec).fitted_c


def piecewise_affine_quotient(model: ProfileModel, epsilon: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Quotient after rescaling the two halves of ``u_W`` by ``1 +- eps``.

    The right half lives on ``[0, (1+eps) T]`` and the left on
    ``[-(1-eps) T, 0]``, so the total length stays ``2T``.
    """
    if not abs(epsilon) < 1.0:
        raise ValueError("epsilon must satisfy |epsilon| < 1")
    params = model.params
    p, q, r = params.p, params.q, params.r
    a = 1.0 / (r - 1.0)
    J1 = moment_integral(model, Q_WEIGHTED, 0.0, spec)
    J2 = moment_integral(model, GRADIENT_WEIGHTED, 0.0, spec)
    up, dn = 1.0 + epsilon, 1.0 - epsilon
    nq = 0.5 * J1 * (up ** (1.0 - q * a) + dn ** (1.0 - q * a))
    np_ = 0.5 * J2 * (up ** (1.0 - p - p * a) + dn ** (1.0 - p - p * a))
    return (2.0 * model.T) ** params.theta * np_ ** (1.0 / p) / nq ** (1.0 / q)


def piecewise_fit(model: ProfileModel, eps_list=DEFAULT_EPS, spec: QuadratureSpec = DEFAULT_SPEC) -> SecondOrderFit:
    eps = np.asarray(eps_list, dtype=float)
    qp = [piecewise_affine_quotient(model, e, spec) for e in eps]
    qm = [piecewise_affine_quotient(model, -e, spec) for e in eps]
    q0 = piecewise_affine_quotient(model, 0.0, spec)
    c = fit_second_order(eps, qp, qm, q0)
    return SecondOrderFit(tuple(eps), q0, tuple(qp), tuple(qm), c, gamma_piecewise(model.params))

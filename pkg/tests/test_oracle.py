import math

import numpy as np
import pytest

from wirtinger import DegenerateError, derive, minimize_j
from wirtinger.oracle import (
    DiscreteProblem,
    constraint_residual,
    descend,
    discrete_quotient,
    minimize_rayleigh,
    project_constraint,
    q_norm,
    richardson,
)


def test_quotient_of_sine():
    P = derive(2, 2, 2)
    prob = DiscreteProblem.on_grid(400, lambda x: np.sin(np.pi * x / 2), 2.0)
    # 2 ||u'||_2 / ||u||_2 = pi for sin(pi x / 2) on [-1, 1], up to O(h^2)
    assert discrete_quotient(prob, P) == pytest.approx(math.pi, rel=1e-4)


def test_problem_validates_shape():
    with pytest.raises(ValueError):
        DiscreteProblem.on_grid(10, np.zeros(5), 2.0)


@pytest.mark.parametrize("r", [1.5, 2.0, 3.0])
def test_projection_zeroes_constraint(r, rng):
    u = rng.normal(size=201) + 0.3
    v = project_constraint(u, r)
    assert abs(constraint_residual(v, r)) < 1e-12
    assert np.allclose(np.diff(v), np.diff(u))


def test_projection_of_constant_fails():
    with pytest.raises(DegenerateError):
        project_constraint(np.ones(11), 2.0)


def test_zero_vector_quotient_fails():
    with pytest.raises(DegenerateError):
        discrete_quotient(DiscreteProblem.on_grid(50, np.zeros(51), 2.0), derive(2, 2, 2))


def test_q_norm_of_constant():
    assert q_norm(np.ones(101), 3.0) == pytest.approx(2.0 ** (1 / 3))


def test_descent_is_monotone():
    P = derive(2, 4, 2)
    x = np.linspace(-1, 1, 101)
    _, hist = descend(x + 0.3 * x**2, P, iters=50)
    assert np.all(np.diff(hist) < 0)


def test_classical_case():
    res = minimize_rayleigh(derive(2, 2, 2), n=200, starts=2, seed=7)
    assert res.lambda_est == pytest.approx(math.pi, rel=1e-4)
    lam, u = res
    assert abs(constraint_residual(u, 2.0)) < 1e-10
    assert q_norm(u, 2.0) == pytest.approx(1.0)


def test_asymmetric_case_beats_poincare():
    P = derive(2, 8, 2)
    res = minimize_rayleigh(P, n=200, starts=3, seed=0)
    ref = minimize_j(P)
    assert res.lambda_est < ref.lambda_p
    assert res.lambda_est == pytest.approx(ref.lambda_w, rel=1e-3)


def test_seed_determinism():
    P = derive(3, 4, 1.5)
    a = minimize_rayleigh(P, n=100, starts=2, seed=5)
    b = minimize_rayleigh(P, n=100, starts=2, seed=5)
    assert a.lambda_est == b.lambda_est
    assert np.array_equal(a.u_best, b.u_best)


def test_richardson_removes_quadratic_error():
    ns = [100, 200]
    vals = [1.0 + 3.0 / n**2 for n in ns]
    assert richardson(vals, ns) == pytest.approx(1.0, abs=1e-14)


def test_input_checks():
    with pytest.raises(ValueError):
        minimize_rayleigh(derive(2, 2, 2), n=10)
    with pytest.raises(ValueError):
        minimize_rayleigh(derive(2, 2, 2), starts=0)

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import beta

from wirtinger import DomainError, build_model, cut_and_paste, derive, eval_u_p, eval_u_w, minimize_j, verify_moment_identities
from wirtinger.profiles import (
    GRADIENT_WEIGHTED,
    PLAIN,
    Q_WEIGHTED,
    first_integral_residual,
    inverse_x,
    moment_integral,
    quarter_period,
    rayleigh_quotient_odd,
    x_of_u,
)

TRIPLES = [(2, 2, 2), (2, 8, 2), (3, 4, 1.5), (1.5, 9, 3), (2, 3.5, 1.5), (4, 1.5, 2)]


def beta_T(p, q):
    return beta(1 / q, 1 - 1 / p) / q


@pytest.mark.parametrize("triple", TRIPLES)
def test_quarter_period_matches_beta(triple, models):
    p, q, _ = triple
    assert models(*triple).T == pytest.approx(beta_T(p, q), rel=1e-13)


def test_quarter_period_reference_values():
    # frozen 30-digit values
    assert quarter_period(derive(2, 8, 2)) == pytest.approx(1.1635925712182694, rel=1e-14)
    assert quarter_period(derive(3, 4, 2)) == pytest.approx(1.1627870294270218, rel=1e-14)
    assert quarter_period(derive(1.5, 9, 2)) == pytest.approx(1.2729540916112991, rel=1e-14)


def test_classical_profiles_are_sine_and_cosine(models):
    model = models(2, 2, 2)
    x = np.linspace(-math.pi / 2, math.pi / 2, 2001)
    assert np.max(np.abs(eval_u_w(model, x) - np.sin(x))) < 1e-14
    assert np.max(np.abs(eval_u_p(model, x) - np.cos(x))) < 1e-14


def test_near_endpoint_resolution(models):
    model = models(2, 2, 2)
    x = math.pi / 2 - np.geomspace(1e-2, 1e-9, 30)
    assert np.max(np.abs(eval_u_w(model, x) - np.sin(x))) < 1e-15


@pytest.mark.parametrize("triple", TRIPLES)
def test_inverse_round_trip(triple, models):
    model = models(*triple)
    u = np.concatenate([np.linspace(0.0, 0.99, 200), 1.0 - np.geomspace(1e-2, 1e-10, 50)])
    assert np.max(np.abs(inverse_x(model, x_of_u(model, u)) - u)) < 1e-12


@pytest.mark.parametrize("triple", TRIPLES)
def test_profile_symmetries_and_boundary_values(triple, models):
    model = models(*triple)
    T = model.T
    x = np.linspace(0.0, T, 301)
    assert np.allclose(eval_u_w(model, -x), -eval_u_w(model, x), atol=0, rtol=0)
    assert np.allclose(eval_u_p(model, -x), eval_u_p(model, x), atol=0, rtol=0)
    assert eval_u_w(model, T) == 1.0 and eval_u_p(model, T) == 0.0 and eval_u_p(model, 0.0) == 1.0
    assert np.all(np.diff(eval_u_w(model, x)) > 0.0)


@pytest.mark.parametrize("triple", TRIPLES)
def test_cut_and_paste_equals_odd_profile(triple, models):
    model = models(*triple)
    x = np.linspace(-model.T, model.T, 401)
    assert np.max(np.abs(cut_and_paste(model, x) - eval_u_w(model, x))) < 1e-13


@pytest.mark.parametrize("triple", TRIPLES)
def test_first_integral(triple, models):
    model = models(*triple)
    # for q < 2 the derivative has a |u|^q kink at 0, so the grid avoids it
    x = np.linspace(-0.9, 0.9, 36) * model.T
    assert np.max(np.abs(first_integral_residual(model, x))) < 1e-8


def test_domain_check(models):
    model = models(2, 8, 2)
    with pytest.raises(DomainError):
        eval_u_w(model, 1.01 * model.T)
    with pytest.raises(DomainError):
        cut_and_paste(model, -1.01 * model.T)


@pytest.mark.parametrize("triple", TRIPLES)
def test_moment_identities(triple, models):
    model = models(*triple)
    for s in (0.0, 0.5, 1.0, triple[2] - 1.0, 2.3):
        r1, r2 = verify_moment_identities(model, s)
        assert r1 <= 1e-12 and r2 <= 1e-12


@pytest.mark.parametrize("triple", TRIPLES)
def test_plain_moment_matches_beta(triple, models):
    p, q, r = triple
    s = r - 1.0
    # int |u_W|^(2s) over [-T, T] = 2 B((2s+1)/q, 1 - 1/p) / q
    expected = 2.0 * beta((2 * s + 1) / q, 1 - 1 / p) / q
    assert moment_integral(models(*triple), PLAIN, s) == pytest.approx(expected, rel=1e-12)


def test_moment_kinds_validated(models):
    with pytest.raises(ValueError):
        moment_integral(models(2, 2, 2), "cubic", 0.0)
    with pytest.raises(ValueError):
        moment_integral(models(2, 2, 2), Q_WEIGHTED, -1.0)


@pytest.mark.parametrize("triple", [(2, 2, 2), (2, 4, 2), (3, 4, 1.5), (1.5, 9, 3)])
def test_odd_profile_quotient_is_poincare_constant(triple, models):
    assert rayleigh_quotient_odd(models(*triple)) == pytest.approx(minimize_j(derive(*triple)).lambda_p, rel=1e-12)


def test_gradient_weighted_moment_classical(models):
    # int cos^2 over [-pi/2, pi/2] = pi/2
    assert moment_integral(models(2, 2, 2), GRADIENT_WEIGHTED, 0.0) == pytest.approx(math.pi / 2, rel=1e-13)


def test_model_is_immutable(models):
    model = models(2, 2, 2)
    with pytest.raises(ValueError):
        model.u_nodes[0] = 0.5


@given(st.floats(1.2, 5.0), st.floats(1.2, 12.0))
@settings(max_examples=15, deadline=None)
def test_random_exponents_monotone_and_bounded(p, q):
    model = build_model(derive(p, q, 2.0), nodes=129)
    assert model.T == pytest.approx(beta_T(p, q), rel=1e-11)
    x = np.linspace(-model.T, model.T, 101)
    u = eval_u_w(model, x)
    assert np.all(np.diff(u) > 0.0)
    assert np.all(np.abs(u) <= 1.0)

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import beta

from wirtinger import QuadratureSpec, integrate
from wirtinger.errors import ConvergenceError, NonFiniteError
from wirtinger.quad import ADAPTIVE_BISECTION, integrate_batch

BISECTION = QuadratureSpec(method=ADAPTIVE_BISECTION)


def test_polynomial_exact():
    res = integrate(lambda x: 3 * x**2, 0.0, 2.0)
    assert res.value == pytest.approx(8.0, rel=1e-14)
    spec = QuadratureSpec()
    assert res.error_estimate <= max(spec.abs_tol, spec.rel_tol * 8.0)


def test_inverse_sqrt_singularity():
    assert integrate(lambda x: x**-0.5, 0.0, 1.0).value == pytest.approx(2.0, rel=1e-12)


def test_endpoint_distances_rebuild_singular_factor():
    # (1 - x)^(-0.9) near x = 1; the distance db keeps full precision
    res = integrate(lambda x, da, db: db**-0.9, 0.0, 1.0, endpoint_distances=True)
    assert res.value == pytest.approx(10.0, rel=1e-10)


@given(st.floats(0.05, 0.9), st.floats(0.05, 0.9))
@settings(max_examples=30, deadline=None)
def test_beta_integrals(a, b):
    res = integrate(lambda x, da, db: da ** (a - 1) * db ** (b - 1), 0.0, 1.0, endpoint_distances=True)
    assert res.value == pytest.approx(beta(a, b), rel=1e-9)


def test_adaptive_bisection_on_smooth_integrands():
    assert integrate(np.cos, 0.0, math.pi / 2, BISECTION).value == pytest.approx(1.0, rel=1e-12)
    assert integrate(np.exp, -1.0, 1.0, BISECTION).value == pytest.approx(math.e - 1 / math.e, rel=1e-12)


def test_batch_matches_scalar():
    powers = np.array([0.5, 1.0, 2.0])
    res = integrate_batch(lambda x: x[None, :] ** powers[:, None], 0.0, 1.0)
    assert np.allclose(res.value, 1.0 / (powers + 1.0), rtol=1e-13)


def test_reversed_interval_rejected():
    with pytest.raises(ValueError):
        integrate(np.cos, 1.0, 0.0)


def test_non_finite_integrand():
    with pytest.raises(NonFiniteError):
        integrate(lambda x: np.full_like(x, np.nan), 0.0, 1.0)


def test_nonintegrable_singularity_fails_to_converge():
    with pytest.raises(ConvergenceError):
        integrate(lambda x: 1.0 / x, 0.0, 1.0, QuadratureSpec(max_levels=6))


@pytest.mark.parametrize("kwargs", [{"method": "Simpson"}, {"abs_tol": 0.0}, {"rel_tol": -1.0}, {"max_levels": 2}])
def test_spec_validation(kwargs):
    with pytest.raises(ValueError):
        QuadratureSpec(**kwargs)

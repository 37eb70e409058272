"""Tests for the JAX-to-NumPy bridges."""

import jax.numpy as jnp
import numpy as np
import pytest_cases

from groupswarm.utils import autodiff


def _polar(x, *, scale):
    return scale * jnp.stack([jnp.cos(x[0]) * x[1], jnp.sin(x[0]) * x[1]])


def case_origin():
    return np.asarray([0.0, 1.0])


def case_quarter_turn():
    return np.asarray([np.pi / 2, 2.0])


@pytest_cases.parametrize_with_cases("x", cases=".")
def test_function_returns_numpy(x):
    f = autodiff.numpy_function(_polar, scale=2.0)
    value = f(x)
    assert isinstance(value, np.ndarray)
    assert np.allclose(value, 2.0 * x[1] * np.asarray([np.cos(x[0]), np.sin(x[0])]))


@pytest_cases.parametrize_with_cases("x", cases=".")
def test_jacobian_matches_finite_differences(x):
    jac = autodiff.numpy_jacobian(_polar, scale=2.0)(x)
    f = autodiff.numpy_function(_polar, scale=2.0)
    h = 1e-6
    columns = [(f(x + h * e) - f(x - h * e)) / (2 * h) for e in np.eye(2)]
    assert isinstance(jac, np.ndarray)
    assert np.allclose(jac, np.stack(columns, axis=1), atol=1e-6)

"""Bridges between JAX transformations and SciPy optimisers."""

import functools
from typing import Any, Callable

import jax
import numpy as np


def numpy_function(fun: Callable[..., Any], **kwargs: Any) -> Callable[..., Any]:
    """Wrap a JAX function so that it consumes and returns NumPy arrays.

    Parameters
    ----------
    fun
        Function to be wrapped.
    **kwargs
        Keyword arguments passed to ``fun`` on every call.

    Returns
    -------
    :
        Jitted function with NumPy inputs and outputs.
    """
    jitted = _jit(fun)
    return lambda x: np.asarray(jitted(x, **kwargs))


def numpy_jacobian(fun: Callable[..., Any], **kwargs: Any) -> Callable[..., Any]:
    """Forward-mode Jacobian of a function with NumPy inputs and outputs.

    Parameters
    ----------
    fun
        Function to be differentiated with respect to its first argument.
    **kwargs
        Keyword arguments passed to ``fun`` on every call. Not differentiated.

    Returns
    -------
    :
        Jitted Jacobian with NumPy inputs and outputs.
    """
    jac = _jit_jacfwd(fun)
    return lambda x: np.asarray(jac(x, **kwargs))


@functools.lru_cache(maxsize=None)
def _jit(fun: Callable[..., Any]) -> Callable[..., Any]:
    return jax.jit(fun)


@functools.lru_cache(maxsize=None)
def _jit_jacfwd(fun: Callable[..., Any]) -> Callable[..., Any]:
    return jax.jit(jax.jacfwd(fun))

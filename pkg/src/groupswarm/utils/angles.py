"""Angle arithmetic on the circle."""

import jax
import jax.numpy as jnp
import numpy as np

from groupswarm.typing import ArrayLike

TWO_PI = 2.0 * jnp.pi


@jax.jit
def wrap(theta: ArrayLike) -> ArrayLike:
    """Normalise angles to :math:`[0, 2\\pi)`.

    Parameters
    ----------
    theta
        Angles in radians.

    Returns
    -------
    :
        Angles in :math:`[0, 2\\pi)`.

    Examples
    --------
    >>> print(wrap(jnp.asarray([-jnp.pi / 2, 2 * jnp.pi, 0.5])))
    [4.71238898 0.         0.5       ]
    """
    theta = jnp.mod(theta, TWO_PI)
    # jnp.mod of a tiny negative number rounds up to exactly 2*pi
    return jnp.where(theta >= TWO_PI, 0.0, theta)


@jax.jit
def circular_distance(a: ArrayLike, b: ArrayLike) -> ArrayLike:
    """Length of the shorter arc between two angles.

    Examples
    --------
    >>> print(circular_distance(0.1, 2 * jnp.pi - 0.1))
    0.2
    """
    d = jnp.abs(wrap(a) - wrap(b))
    return jnp.minimum(d, TWO_PI - d)


def headings_close(a: ArrayLike, b: ArrayLike, *, tol: float) -> bool:
    """Whether all headings agree up to ``tol`` on the circle."""
    return bool(jnp.all(circular_distance(a, b) <= tol))


def wrap_host(theta: ArrayLike) -> np.ndarray:
    """Host-side :func:`wrap` for small numpy inputs that need no device dispatch.

    Examples
    --------
    >>> print(wrap_host([-np.pi / 2, 2 * np.pi, 0.5]))
    [4.71238898 0.         0.5       ]
    """
    theta = np.mod(np.asarray(theta, dtype=float), TWO_PI)
    return np.where(theta >= TWO_PI, 0.0, theta)

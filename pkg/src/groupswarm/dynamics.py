"""Switched discrete-time dynamics of a group-controlled swarm.

Each step broadcasts one arc length. Active robots drive forward along their
heading by that arc; every other robot pivots in place by ``arc / r_i``.
"""

import dataclasses
import functools
import math
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple

import jax
import jax.numpy as jnp
import numpy as np

from groupswarm import defaults
from groupswarm.errors import InvalidArgumentError
from groupswarm.typing import ArrayLike
from groupswarm.utils import angles


@dataclasses.dataclass(frozen=True)
class SwarmParams:
    """Physical parameters of the swarm."""

    n: int
    r: float = defaults.TURNING_RADIUS
    r_overrides: Optional[Tuple[float, ...]] = None
    u_nominal: float = defaults.U_NOMINAL

    def __post_init__(self) -> None:
        if self.n < 1:
            raise InvalidArgumentError(f"n must be >= 1, got {self.n}.")
        if not self.r > 0:
            raise InvalidArgumentError(f"Turning radius must be positive, got {self.r}.")
        if not self.u_nominal > 0:
            raise InvalidArgumentError(
                f"Nominal speed must be positive, got {self.u_nominal}."
            )
        if self.r_overrides is not None:
            overrides = tuple(float(r) for r in self.r_overrides)
            if len(overrides) != self.n:
                raise InvalidArgumentError(
                    f"Expected {self.n} turning radii, got {len(overrides)}."
                )
            if not all(r > 0 for r in overrides):
                raise InvalidArgumentError("Every turning radius must be positive.")
            object.__setattr__(self, "r_overrides", overrides)

    @property
    def radii(self) -> Tuple[float, ...]:
        """Turning radius of every robot."""
        if self.r_overrides is not None:
            return self.r_overrides
        return (float(self.r),) * self.n


class SwarmState(NamedTuple):
    """Positions ``(n, 2)`` and orientations ``(n,)`` of all robots."""

    positions: ArrayLike
    orientations: ArrayLike

    @property
    def n(self) -> int:
        return int(self.orientations.shape[0])


def make_state(
    positions: ArrayLike, orientations: Optional[ArrayLike] = None
) -> SwarmState:
    """Validate and normalise a swarm state.

    Orientations default to zero and are wrapped into :math:`[0, 2\\pi)`.

    Examples
    --------
    >>> s = make_state([[0.0, 1.0], [2.0, 3.0]], [-jnp.pi / 2, 0.0])
    >>> print(s.orientations)
    [4.71238898 0.        ]
    """
    positions = jnp.asarray(positions, dtype=float)
    if positions.ndim != 2 or positions.shape[1] != 2:
        raise InvalidArgumentError(
            f"Positions must have shape (n, 2), got {positions.shape}."
        )
    if orientations is None:
        orientations = jnp.zeros(positions.shape[0])
    orientations = jnp.asarray(orientations, dtype=float).reshape((-1,))
    if orientations.shape[0] != positions.shape[0]:
        raise InvalidArgumentError(
            f"Got {positions.shape[0]} positions but {orientations.shape[0]} orientations."
        )
    if not (jnp.all(jnp.isfinite(positions)) and jnp.all(jnp.isfinite(orientations))):
        raise InvalidArgumentError("Swarm states must be finite.")
    return SwarmState(positions, angles.wrap(orientations))


class ControlStep(NamedTuple):
    """One broadcast command: which robots translate, and for how far."""

    activation: np.ndarray
    arc: float


class ActivationSequence(NamedTuple):
    """Ordered control steps, stored column-wise.

    ``activations`` has shape ``(S, n)`` and ``arcs`` shape ``(S,)``.
    """

    activations: np.ndarray
    arcs: np.ndarray

    @property
    def n(self) -> int:
        return int(self.activations.shape[1])

    @property
    def num_steps(self) -> int:
        return int(self.arcs.shape[0])

    @property
    def total_arc(self) -> float:
        return float(np.sum(self.arcs))

    @property
    def steps(self) -> List[ControlStep]:
        return [ControlStep(a, float(d)) for a, d in zip(self.activations, self.arcs)]

    @classmethod
    def empty(cls, n: int) -> "ActivationSequence":
        """The identity action."""
        return cls(np.zeros((0, n), dtype=np.int8), np.zeros((0,), dtype=float))

    @classmethod
    def from_steps(cls, steps: Iterable[ControlStep], *, n: int) -> "ActivationSequence":
        """Collect control steps into a sequence."""
        steps = list(steps)
        if not steps:
            return cls.empty(n)
        activations = np.stack([np.asarray(s.activation, dtype=np.int8) for s in steps])
        arcs = np.asarray([s.arc for s in steps], dtype=float)
        return _checked(cls(activations, arcs), n=n)

    @classmethod
    def single(cls, activation: ArrayLike, arc: float) -> "ActivationSequence":
        """A one-step sequence, or the empty sequence if ``arc == 0``."""
        activation = np.asarray(activation, dtype=np.int8).reshape((1, -1))
        if arc == 0.0:
            return cls.empty(activation.shape[1])
        return _checked(cls(activation, np.asarray([arc], dtype=float)), n=activation.shape[1])

    def drop_idle(self) -> "ActivationSequence":
        """Remove zero-arc steps."""
        keep = self.arcs > 0.0
        return ActivationSequence(self.activations[keep], self.arcs[keep])

    def reverse_direction(self, *, params: SwarmParams) -> "ActivationSequence":
        """Sandwich between two half turns of the whole swarm.

        Turning everybody around, replaying, and turning back reverses every
        translation the sequence makes and keeps its net rotations.
        """
        half_turn = rotate_all_step(math.pi, params=params)
        return concatenate([half_turn, self, half_turn], n=self.n)


def concatenate(
    sequences: Sequence[ActivationSequence], *, n: int
) -> ActivationSequence:
    """Execute sequences one after another."""
    sequences = [s for s in sequences if s.num_steps > 0]
    if not sequences:
        return ActivationSequence.empty(n)
    for s in sequences:
        if s.n != n:
            raise InvalidArgumentError(f"Cannot concatenate a {s.n}-robot sequence.")
    return ActivationSequence(
        np.concatenate([s.activations for s in sequences]),
        np.concatenate([s.arcs for s in sequences]),
    )


def rotate_all_step(theta: float, *, params: SwarmParams) -> ActivationSequence:
    """Rotate every robot by ``theta`` with the empty group.

    With distinct turning radii the rotation equals ``theta`` only for robots
    whose radius is ``params.r``.
    """
    theta = float(angles.wrap_host(theta))
    return ActivationSequence.single(np.zeros(params.n, dtype=np.int8), theta * params.r)


def _checked(seq: ActivationSequence, *, n: int) -> ActivationSequence:
    if seq.activations.ndim != 2 or seq.activations.shape[1] != n:
        raise InvalidArgumentError(
            f"Activations must have length n={n}, got shape {seq.activations.shape}."
        )
    if not np.isin(seq.activations, (0, 1)).all():
        raise InvalidArgumentError("Activations must be binary.")
    if not np.all(np.isfinite(seq.arcs)) or np.any(seq.arcs < 0.0):
        raise InvalidArgumentError("Arc lengths must be finite and nonnegative.")
    return seq


class Trajectory(NamedTuple):
    """Sampled motion of the swarm.

    ``positions`` has shape ``(T, n, 2)`` and ``orientations`` shape ``(T, n)``.
    ``boundaries[s]`` is the sample index of the state before step ``s``; the
    last entry indexes the final state.
    """

    positions: ArrayLike
    orientations: ArrayLike
    boundaries: np.ndarray

    @property
    def num_samples(self) -> int:
        return int(self.positions.shape[0])

    def sample(self, index: int) -> SwarmState:
        return SwarmState(self.positions[index], self.orientations[index])

    @property
    def samples(self) -> List[SwarmState]:
        return [self.sample(i) for i in range(self.num_samples)]

    @property
    def initial(self) -> SwarmState:
        return self.sample(0)

    @property
    def final(self) -> SwarmState:
        return self.sample(-1)


def _advance(
    positions: ArrayLike,
    orientations: ArrayLike,
    activation: ArrayLike,
    arc: ArrayLike,
    radii: ArrayLike,
) -> Tuple[ArrayLike, ArrayLike]:
    active = activation > 0
    heading = jnp.stack([jnp.cos(orientations), jnp.sin(orientations)], axis=-1)
    positions = jnp.where(active[:, None], positions + arc * heading, positions)
    orientations = jnp.where(
        active, orientations, angles.wrap(orientations + arc / radii)
    )
    return positions, orientations


_advance_jit = jax.jit(_advance)
_advance_many = jax.jit(jax.vmap(_advance, in_axes=(0, 0, 0, 0, None)))


@jax.jit
def _rollout(
    positions: ArrayLike,
    orientations: ArrayLike,
    activations: ArrayLike,
    arcs: ArrayLike,
    radii: ArrayLike,
) -> Tuple[ArrayLike, ArrayLike]:
    def body(carry, step):
        carry = _advance(*carry, *step, radii)
        return carry, carry

    _, (ps, ths) = jax.lax.scan(body, (positions, orientations), (activations, arcs))
    return ps, ths


def step(state: SwarmState, cs: ControlStep, *, params: SwarmParams) -> SwarmState:
    """Apply one control step in closed form.

    Examples
    --------
    >>> params = SwarmParams(n=1)
    >>> s = make_state([[0.0, 0.0]], [0.0])
    >>> print(step(s, ControlStep(np.ones(1), 1.0), params=params).positions)
    [[1. 0.]]
    >>> print(step(s, ControlStep(np.zeros(1), 0.5), params=params).orientations)
    [0.5]
    """
    activation = np.asarray(cs.activation)
    if activation.shape != (params.n,):
        raise InvalidArgumentError(
            f"Activation must have length n={params.n}, got {activation.shape}."
        )
    if not (cs.arc >= 0.0 and math.isfinite(cs.arc)):
        raise InvalidArgumentError(f"Arc must be finite and nonnegative, got {cs.arc}.")
    positions, orientations = _advance_jit(
        state.positions,
        state.orientations,
        jnp.asarray(activation),
        jnp.asarray(cs.arc, dtype=float),
        jnp.asarray(params.radii),
    )
    return SwarmState(positions, orientations)


def simulate(
    state: SwarmState,
    seq: ActivationSequence,
    *,
    params: SwarmParams,
    resolution: Optional[float] = defaults.RESOLUTION,
) -> Trajectory:
    """Roll out an activation sequence.

    Parameters
    ----------
    state
        Initial state.
    seq
        Activation sequence.
    params
        Swarm parameters.
    resolution
        Maximal arc between two consecutive samples within a step.
        ``None`` records step boundaries only.

    Returns
    -------
    :
        Trajectory whose first sample is ``state``.
    """
    if seq.n != params.n or state.n != params.n:
        raise InvalidArgumentError(
            f"Sequence, state and parameters disagree on n: {seq.n}, {state.n}, {params.n}."
        )
    num_steps = seq.num_steps
    if num_steps == 0:
        return Trajectory(
            state.positions[None], state.orientations[None], np.zeros(1, dtype=int)
        )

    radii = jnp.asarray(params.radii)
    activations, arcs = _pad(seq)
    ps, ths = _rollout(state.positions, state.orientations, activations, arcs, radii)
    # assembled on the host; step counts vary too much to compile per shape
    ps, ths = np.asarray(ps), np.asarray(ths)
    boundary_positions = np.concatenate([np.asarray(state.positions)[None], ps[:num_steps]])
    boundary_orientations = np.concatenate(
        [np.asarray(state.orientations)[None], ths[:num_steps]]
    )

    if resolution is None or resolution <= 0.0:
        return Trajectory(
            boundary_positions, boundary_orientations, np.arange(num_steps + 1)
        )

    counts = np.maximum(1, np.ceil(seq.arcs / resolution).astype(int))
    boundaries = np.concatenate([[0], np.cumsum(counts)])
    within = np.concatenate([np.arange(1, c) for c in counts]).astype(int)
    owner = np.repeat(np.arange(num_steps), counts - 1)
    if owner.size == 0:
        return Trajectory(boundary_positions, boundary_orientations, boundaries)

    fractions = within / counts[owner]
    # padded with zero arcs, like the roll-out
    extra = _padded_length(owner.size) - owner.size
    source = np.concatenate([owner, np.zeros(extra, dtype=int)])
    sub_arcs = np.concatenate([seq.arcs[owner] * fractions, np.zeros(extra)])
    interior_positions, interior_orientations = _advance_many(
        boundary_positions[source],
        boundary_orientations[source],
        jnp.asarray(seq.activations[source]),
        jnp.asarray(sub_arcs),
        radii,
    )
    interior_positions = np.asarray(interior_positions)[: owner.size]
    interior_orientations = np.asarray(interior_orientations)[: owner.size]
    order = np.empty(int(boundaries[-1]) + 1, dtype=int)
    order[boundaries] = np.arange(num_steps + 1)
    order[boundaries[owner] + within] = num_steps + 1 + np.arange(owner.size)
    positions = np.concatenate([boundary_positions, interior_positions])[order]
    orientations = np.concatenate([boundary_orientations, interior_orientations])[order]
    return Trajectory(positions, orientations, boundaries)


def final_state(
    state: SwarmState, seq: ActivationSequence, *, params: SwarmParams
) -> SwarmState:
    """Net effect of a sequence."""
    return simulate(state, seq, params=params, resolution=None).final


def _pad(seq: ActivationSequence) -> Tuple[ArrayLike, ArrayLike]:
    # zero-arc steps are exact identities; powers of two bound recompilation
    length = _padded_length(seq.num_steps)
    extra = length - seq.num_steps
    activations = np.concatenate(
        [seq.activations, np.zeros((extra, seq.n), dtype=seq.activations.dtype)]
    )
    arcs = np.concatenate([seq.arcs, np.zeros(extra)])
    return jnp.asarray(activations), jnp.asarray(arcs)


@functools.lru_cache(maxsize=None)
def _padded_length(num_steps: int) -> int:
    return 1 << max(0, num_steps - 1).bit_length()


def path_length(traj: Trajectory) -> float:
    """Total distance travelled by all pivot points."""
    if traj.num_samples < 2:
        return 0.0
    increments = jnp.diff(traj.positions, axis=0)
    return float(jnp.sum(jnp.sqrt(jnp.sum(increments**2, axis=-1))))


def sequence_path_length(seq: ActivationSequence) -> float:
    """Path length computed from the sequence alone.

    Examples
    --------
    >>> seq = ActivationSequence.single(np.array([0, 1, 1]), 2.0)
    >>> sequence_path_length(seq)
    4.0
    """
    return float(np.sum(seq.arcs * seq.activations.sum(axis=1)))


def execution_time(seq: ActivationSequence, *, params: SwarmParams) -> float:
    """Signal time consumed by a sequence.

    Examples
    --------
    >>> execution_time(ActivationSequence.single(np.ones(2), 10.0), params=SwarmParams(n=2))
    10.0
    """
    return float(np.sum(seq.arcs)) / params.u_nominal


def net_rotation(seq: ActivationSequence, *, params: SwarmParams) -> ArrayLike:
    """Net heading change of every robot, independent of the initial state.

    Examples
    --------
    >>> seq = ActivationSequence.single(np.array([1, 0]), 0.5)
    >>> print(net_rotation(seq, params=SwarmParams(n=2)))
    [0.  0.5]
    """
    if seq.num_steps == 0:
        return np.zeros(params.n)
    inactive = 1 - seq.activations
    total = np.sum(inactive * seq.arcs[:, None], axis=0)
    return angles.wrap_host(total / np.asarray(params.radii))


def activation_from_members(members: Iterable[int], *, n: int) -> np.ndarray:
    """Activation vector that translates exactly the given robots (1-based)."""
    activation = np.zeros(n, dtype=np.int8)
    for robot in members:
        if not 1 <= robot <= n:
            raise InvalidArgumentError(f"Robot {robot} is not in 1..{n}.")
        activation[robot - 1] = 1
    return activation

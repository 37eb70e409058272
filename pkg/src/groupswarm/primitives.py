"""Compiled control composites.

All composites are built from two kinds of raw steps: ``f_i(d)`` (group ``i``
active for arc ``d``) and ``f_m(d)`` (nobody active, everybody pivots).
"""

import functools
import logging
import math
from typing import Iterable, Sequence, Tuple

import numpy as np

from groupswarm import defaults
from groupswarm.allocation import GroupAllocation
from groupswarm.dynamics import (
    ActivationSequence,
    SwarmParams,
    SwarmState,
    concatenate,
    net_rotation,
    rotate_all_step,
)
from groupswarm.errors import InvalidArgumentError, RankDeficientError
from groupswarm.typing import ArrayLike, HeadingMap, RobotLabel, RotationTargets
from groupswarm.utils import angles

logger = logging.getLogger(__name__)

_ZERO_ANGLE = 1e-12
"""Rotation amounts below this are dropped from compiled sequences."""


def rotate_all(theta: float, *, params: SwarmParams) -> ActivationSequence:
    """Rotate every robot by ``theta`` in place.

    Examples
    --------
    >>> from groupswarm.dynamics import SwarmParams
    >>> seq = rotate_all(math.pi, params=SwarmParams(n=3))
    >>> print(seq.activations, seq.arcs)
    [[0 0 0]] [3.14159265]
    >>> rotate_all(2 * math.pi, params=SwarmParams(n=3)).num_steps
    0
    """
    return rotate_all_step(theta, params=params)


def field(group: int, arc: float, *, alloc: GroupAllocation) -> ActivationSequence:
    """Raw field ``f_group(arc)``."""
    if arc < 0.0:
        raise InvalidArgumentError(f"Raw fields are unilateral, got arc={arc}.")
    return ActivationSequence.single(alloc.activation(group), arc)


def bilateral_rotation(
    i: int,
    theta: float,
    *,
    alloc: GroupAllocation,
    params: SwarmParams,
    eps: float = defaults.EPSILON,
) -> ActivationSequence:
    """Rotate the robots outside group ``i`` by ``theta``; group ``i`` returns.

    Every application of ``(f_i(d), f_m(pi), f_i(d), f_m(pi))`` drives the
    members out by ``d`` and back, while the others turn by ``2 d / r``. Legs
    are capped at ``eps`` so the members never leave an ``eps``-ball.

    Parameters
    ----------
    i
        Translating group, ``1 <= i < m``.
    theta
        Signed rotation in radians. Negative angles turn the long way round.
    alloc
        Group allocation.
    params
        Swarm parameters with a common turning radius.
    eps
        Largest excursion of a group member.

    Returns
    -------
    :
        Activation sequence realising ``h_i(theta)``.
    """
    _check_translating_group(i, alloc)
    _require_uniform_radius(params)
    if not eps > 0.0:
        raise InvalidArgumentError(f"eps must be positive, got {eps}.")
    theta = float(angles.wrap_host(theta))
    if theta <= _ZERO_ANGLE:
        return ActivationSequence.empty(alloc.n)

    half_arc = theta * params.r / 2.0
    if math.isfinite(eps):
        full = int(math.floor(half_arc / eps))
        legs = [eps] * full
        remainder = half_arc - full * eps
        if remainder > _ZERO_ANGLE * params.r:
            legs.append(remainder)
    else:
        legs = [half_arc]

    member = alloc.activation(i)
    nobody = np.zeros(alloc.n, dtype=np.int8)
    half_turn = math.pi * params.r
    activations = np.tile(np.stack([member, nobody, member, nobody]), (len(legs), 1))
    arcs = np.asarray([[d, half_turn, d, half_turn] for d in legs], dtype=float).ravel()
    return ActivationSequence(activations, arcs)


def bilateral_translation(
    i: int,
    d: float,
    *,
    alloc: GroupAllocation,
    params: SwarmParams,
    eps: float = defaults.EPSILON,
) -> ActivationSequence:
    """Translate group ``i`` by signed ``d``; everybody else returns.

    ``g_i(d) = (f_i(d), h_i(-d / r))`` for ``d >= 0`` and
    ``g_i(d) = (f_m(pi), g_i(-d), f_m(pi))`` otherwise.

    Examples
    --------
    >>> from groupswarm.allocation import allocate_groups
    >>> alloc = allocate_groups(6)
    >>> seq = bilateral_translation(1, 1.0, alloc=alloc, params=SwarmParams(n=6))
    >>> print(seq.activations[0], seq.arcs[0])
    [0 0 0 1 1 1] 1.0
    """
    _check_translating_group(i, alloc)
    _require_uniform_radius(params)
    if d == 0.0:
        return ActivationSequence.empty(alloc.n)
    if d < 0.0:
        forward = bilateral_translation(i, -d, alloc=alloc, params=params, eps=eps)
        return forward.reverse_direction(params=params)
    return concatenate(
        [
            field(i, d, alloc=alloc),
            bilateral_rotation(i, -d / params.r, alloc=alloc, params=params, eps=eps),
        ],
        n=alloc.n,
    )


@functools.lru_cache(maxsize=64)
def rotation_matrix(alloc: GroupAllocation) -> np.ndarray:
    """Rotation of every robot per unit of ``h_1, ..., h_{m-1}, f_m``.

    Examples
    --------
    >>> from groupswarm.allocation import allocate_groups
    >>> print(rotation_matrix(allocate_groups(6)))
    [[1 1 0 1]
     [1 0 1 1]
     [1 0 0 1]
     [0 1 1 1]
     [0 1 0 1]
     [0 0 1 1]]
    """
    # the last allocation row is zero, so its column is all ones
    A = np.asarray(1 - alloc.matrix.T, dtype=int)
    A.setflags(write=False)
    return A


def orientation_control(
    targets: RotationTargets,
    *,
    alloc: GroupAllocation,
    params: SwarmParams,
    eps: float = defaults.EPSILON,
) -> Tuple[ActivationSequence, ArrayLike]:
    """Rotate selected robots by prescribed relative amounts.

    Solves the rotation system for the targeted rows with the least-norm
    solution and shifts every amount into :math:`[0, 2\\pi)`.

    Parameters
    ----------
    targets
        Pairs ``(robot, delta)``. Robots must be distinct.
    alloc
        Group allocation.
    params
        Swarm parameters with a common turning radius.
    eps
        Excursion bound of the rotation composites.

    Returns
    -------
    :
        Activation sequence ``h_1(u_1) ... h_{m-1}(u_{m-1}) f_m(u_m)`` and the
        resulting rotation of every robot, shape ``(n,)``.

    Raises
    ------
    RankDeficientError
        If the targeted rows are linearly dependent.
    """
    robots = [int(robot) for robot, _ in targets]
    if len(set(robots)) != len(robots):
        raise InvalidArgumentError(f"Orientation targets must be distinct, got {robots}.")
    for robot in robots:
        if not 1 <= robot <= alloc.n:
            raise InvalidArgumentError(f"Robot {robot} is not in 1..{alloc.n}.")
    if not robots:
        return ActivationSequence.empty(alloc.n), np.zeros(alloc.n)

    A = rotation_matrix(alloc)
    rows = A[np.asarray(robots) - 1].astype(float)
    dependent = _dependent_rows(rows, robots)
    if dependent:
        raise RankDeficientError(dependent)

    deltas = angles.wrap_host([float(delta) for _, delta in targets])
    u = angles.wrap_host(np.linalg.pinv(rows) @ deltas)
    u = np.where(np.minimum(u, angles.TWO_PI - u) < _ZERO_ANGLE, 0.0, u)

    parts = [
        bilateral_rotation(i, float(u[i - 1]), alloc=alloc, params=params, eps=eps)
        for i in range(1, alloc.m)
    ]
    parts.append(rotate_all(float(u[-1]), params=params))
    rotations = angles.wrap_host(A.astype(float) @ u)
    return concatenate(parts, n=alloc.n), rotations


def orientation_control_absolute(
    headings: HeadingMap,
    *,
    state: SwarmState,
    alloc: GroupAllocation,
    params: SwarmParams,
    eps: float = defaults.EPSILON,
) -> Tuple[ActivationSequence, ArrayLike]:
    """Turn selected robots to absolute headings.

    Subtracts the current headings and delegates to :func:`orientation_control`.
    """
    targets = [
        (robot, float(heading) - float(state.orientations[robot - 1]))
        for robot, heading in headings.items()
    ]
    return orientation_control(targets, alloc=alloc, params=params, eps=eps)


def isolation_group(k: RobotLabel, *, alloc: GroupAllocation) -> int:
    """Smallest translating group that contains robot ``k``; ties to the lowest index."""
    groups = [g for g in alloc.groups_of(k) if g < alloc.m]
    return min(groups, key=lambda g: (len(alloc.members(g)), g))


def eliminate_translate(
    group: int,
    keep: Iterable[RobotLabel],
    *,
    d: float,
    alloc: GroupAllocation,
    params: SwarmParams,
    eps: float = defaults.EPSILON,
    raw_field: bool = False,
) -> ActivationSequence:
    """Translate only ``keep`` out of the members of ``group``.

    Starting from ``S = g_group(d)`` (or ``f_group(d)`` if ``raw_field``), every
    round replays ``S`` after turning a few remaining members around relative
    to their start and turning the kept robots back. Turned robots cancel
    their own displacement, kept robots double it. Every other robot only
    pivots.

    Parameters
    ----------
    group
        Translating group.
    keep
        Members of ``group`` that must keep moving.
    d
        Arc of the innermost translation.
    alloc
        Group allocation.
    params
        Swarm parameters with a common turning radius.
    eps
        Excursion bound of the rotation composites.
    raw_field
        Start from the raw field instead of the bilateral translation.

    Returns
    -------
    :
        Activation sequence. Kept robots travel ``2^T d`` along their current
        headings, with ``T`` the number of rounds.
    """
    _check_translating_group(group, alloc)
    if not d > 0.0:
        raise InvalidArgumentError(f"Translation legs must be positive, got d={d}.")
    members = alloc.members(group)
    keep = tuple(sorted(set(keep)))
    if not keep or not set(keep) <= set(members):
        raise InvalidArgumentError(
            f"Kept robots {keep} must be a nonempty subset of group {group} = {members}."
        )
    pending = [j for j in members if j not in keep]
    per_round = max(1, 3 - len(keep))

    if raw_field:
        seq = field(group, d, alloc=alloc)
    else:
        seq = bilateral_translation(group, d, alloc=alloc, params=params, eps=eps)

    rounds = 0
    while pending:
        eliminated, pending = pending[:per_round], pending[per_round:]
        delta = net_rotation(seq, params=params)
        targets = [(j, math.pi - float(delta[j - 1])) for j in eliminated]
        targets += [(j, -float(delta[j - 1])) for j in keep]
        rot, _ = orientation_control(targets, alloc=alloc, params=params, eps=eps)
        seq = concatenate([seq, rot, seq], n=alloc.n)
        rounds += 1
    logger.debug(
        "Eliminated %d robots of group %d in %d rounds (%d steps).",
        len(members) - len(keep),
        group,
        rounds,
        seq.num_steps,
    )
    return seq


def elimination_rounds(group: int, keep: Iterable[RobotLabel], *, alloc: GroupAllocation) -> int:
    """Number of doubling rounds :func:`eliminate_translate` performs."""
    keep = set(keep)
    pending = len(alloc.members(group)) - len(keep)
    per_round = max(1, 3 - len(keep))
    return -(-pending // per_round)


def isolate_translate(
    k: RobotLabel,
    *,
    d: float,
    heading: float,
    state: SwarmState,
    alloc: GroupAllocation,
    params: SwarmParams,
    eps: float = defaults.EPSILON,
) -> ActivationSequence:
    """Translate robot ``k`` alone along an absolute heading.

    Robot ``k`` is first turned to ``heading``. The remaining members of its
    smallest group are then eliminated two per round, so ``k`` travels
    ``2^T d`` while every other robot returns to its position.

    Examples
    --------
    >>> from groupswarm.allocation import allocate_groups
    >>> alloc = allocate_groups(6)
    >>> isolation_group(1, alloc=alloc), elimination_rounds(3, [1], alloc=alloc)
    (3, 1)
    """
    group = isolation_group(k, alloc=alloc)
    aim, _ = orientation_control_absolute(
        {k: heading}, state=state, alloc=alloc, params=params, eps=eps
    )
    move = eliminate_translate(group, [k], d=d, alloc=alloc, params=params, eps=eps)
    return concatenate([aim, move], n=alloc.n)


def distinct_radius_isolate(
    k: RobotLabel,
    *,
    d: float,
    params: SwarmParams,
    min_gain: float = 1e-3,
) -> ActivationSequence:
    """Isolate robot ``k`` using only the all-translate and all-rotate signals.

    Requires pairwise distinct turning radii. Every round replays the previous
    sequence after a common pivot whose arc turns one more robot exactly
    around, relative to the start of the previous sequence. The pivot arc is
    lengthened by full turns of that robot until robot ``k`` keeps a net
    displacement.

    Parameters
    ----------
    k
        Robot to move.
    d
        Length of the innermost translation.
    params
        Swarm parameters with ``r_overrides``.
    min_gain
        Smallest admissible ratio between robot ``k``'s displacement before
        and after a round.

    Returns
    -------
    :
        Activation sequence over the activations ``1...1`` and ``0...0``.
    """
    n = params.n
    if not 1 <= k <= n:
        raise InvalidArgumentError(f"Robot {k} is not in 1..{n}.")
    if not d > 0.0:
        raise InvalidArgumentError(f"d must be positive, got {d}.")
    radii = params.radii
    _check_distinct_radii(radii)

    everybody = np.ones(n, dtype=np.int8)
    nobody = np.zeros(n, dtype=np.int8)
    seq = ActivationSequence.single(everybody, d)
    # displacement in the initial heading frame, and net rotation
    disp = np.full(n, d, dtype=complex)
    turn = np.zeros(n)
    r = np.asarray(radii)

    for e in (j for j in range(1, n + 1) if j != k):
        base = (math.pi - turn[e - 1]) % (2.0 * math.pi)
        for q in range(n + 2):
            alpha = r[e - 1] * (base + 2.0 * math.pi * q)
            phase = turn + alpha / r
            gain = abs(1.0 + np.exp(1j * phase[k - 1]))
            if gain > min_gain:
                break
        else:  # pragma: no cover
            raise InvalidArgumentError(f"Robot {k} cannot be separated from robot {e}.")
        disp = disp + np.exp(1j * phase) * disp
        disp[e - 1] = 0.0
        turn = 2.0 * turn + alpha / r
        seq = concatenate(
            [seq, ActivationSequence.single(nobody, float(alpha)), seq], n=n
        )
    logger.debug("Robot %d net displacement %.6g.", k, abs(disp[k - 1]))
    return seq


def _check_distinct_radii(radii: Sequence[float]) -> None:
    for a in range(len(radii)):
        for b in range(a + 1, len(radii)):
            if radii[a] == radii[b]:
                raise InvalidArgumentError(
                    f"Robots {a + 1} and {b + 1} share the turning radius {radii[a]}."
                )


def _check_translating_group(i: int, alloc: GroupAllocation) -> None:
    if not 1 <= i < alloc.m:
        raise InvalidArgumentError(
            f"Group {i} has no bilateral composite; expected 1 <= i < {alloc.m}."
        )


def _require_uniform_radius(params: SwarmParams) -> None:
    if len(set(params.radii)) > 1:
        raise InvalidArgumentError(
            "Bilateral composites need a common turning radius; "
            "use distinct_radius_isolate for distinct radii."
        )


def independent_robots(
    robots: Iterable[RobotLabel], *, alloc: GroupAllocation
) -> Tuple[RobotLabel, ...]:
    """Greedy subset of robots, in the given order, with independent rotation rows."""
    robots = tuple(robots)
    rows = rotation_matrix(alloc)[np.asarray(robots, dtype=int) - 1].astype(float)
    dependent = set(_dependent_rows(rows, robots))
    return tuple(robot for robot in robots if robot not in dependent)


def _dependent_rows(rows: np.ndarray, robots: Sequence[int]) -> Tuple[int, ...]:
    dependent = []
    basis: list = []
    for row, robot in zip(rows, robots):
        candidate = basis + [row]
        if int(np.linalg.matrix_rank(np.stack(candidate))) == len(candidate):
            basis = candidate
        else:
            dependent.append(robot)
    return tuple(dependent)


"""Hand-designed versus numerically optimised subgroup primitives."""

import logging
from typing import List, NamedTuple, Sequence

import numpy as np

from groupswarm import defaults, primitives
from groupswarm.allocation import allocate_groups
from groupswarm.dynamics import (
    ActivationSequence,
    SwarmParams,
    SwarmState,
    concatenate,
    execution_time,
    make_state,
    path_length,
    simulate,
)
from groupswarm.errors import InvalidArgumentError
from groupswarm.planning.numopt import optimize_primitive

logger = logging.getLogger(__name__)


class ComparisonRow(NamedTuple):
    """Cost and accuracy of one primitive implementation."""

    implementation: str
    steps: int
    execution_time: float
    path_length: float
    error: float


def compare_primitive_implementations(
    subgroup: Sequence[int] = (4, 5),
    *,
    n: int = 6,
    distance: float = 1.0,
    step: float = 0.2,
    steps: int = defaults.NUMOPT_STEPS,
    restarts: int = defaults.NUMOPT_RESTARTS,
    seed: int = 0,
) -> List[ComparisonRow]:
    """Move ``subgroup`` by ``distance`` along the x-axis in increments of ``step``.

    All robots start at the origin facing along the x-axis. The hand-designed
    primitive is the elimination composite on the raw field of the smallest
    group containing the subgroup. The optimised one solves a fresh schedule of
    ``steps`` steps per increment.

    Parameters
    ----------
    subgroup
        Robots to move (1-based).
    n
        Swarm size.
    distance
        Total displacement.
    step
        Displacement per repetition.
    steps
        Control steps of every optimised repetition.
    restarts
        Schedules tried per optimised repetition.
    seed
        Seed of the schedule sampler.

    Returns
    -------
    :
        One row for the hand-designed and one for the optimised primitive.
    """
    if not (distance > 0.0 and step > 0.0):
        raise InvalidArgumentError("Distance and step must be positive.")
    alloc = allocate_groups(n)
    params = SwarmParams(n=n)
    state = make_state(np.zeros((n, 2)))
    keep = sorted(set(int(j) for j in subgroup))
    moving = np.zeros(n, dtype=bool)
    moving[np.asarray(keep) - 1] = True
    targets = np.where(moving[:, None], [distance, 0.0], 0.0)
    repetitions = max(1, int(round(distance / step)))

    containing = [g for g in range(1, alloc.m) if set(keep) <= set(alloc.members(g))]
    if not containing:
        raise InvalidArgumentError(f"No translating group contains {keep}.")
    group = min(containing, key=lambda g: (len(alloc.members(g)), g))
    gain = 2.0 ** primitives.elimination_rounds(group, keep, alloc=alloc)
    once = primitives.eliminate_translate(
        group,
        keep,
        d=distance / repetitions / gain,
        alloc=alloc,
        params=params,
        eps=defaults.UNBOUNDED,
        raw_field=True,
    )
    designed = concatenate([once] * repetitions, n=n)

    optimised = optimize_primitive(
        keep,
        state=state,
        alloc=alloc,
        params=params,
        distance=distance,
        step=step,
        steps=steps,
        restarts=restarts,
        rng=np.random.default_rng(seed),
    )
    rows = [
        _row("hand-designed", designed, state, targets, params),
        _row("numerical", optimised, state, targets, params),
    ]
    for row in rows:
        logger.info("%s primitive: %d steps, error %.3g.", row.implementation, row.steps, row.error)
    return rows


def _row(
    name: str,
    seq: ActivationSequence,
    state: SwarmState,
    targets: np.ndarray,
    params: SwarmParams,
) -> ComparisonRow:
    traj = simulate(state, seq, params=params)
    error = np.linalg.norm(np.asarray(traj.final.positions) - targets, axis=1).max()
    return ComparisonRow(
        implementation=name,
        steps=seq.num_steps,
        execution_time=execution_time(seq, params=params),
        path_length=path_length(traj),
        error=float(error),
    )

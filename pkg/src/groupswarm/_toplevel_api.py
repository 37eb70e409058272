"""Top-level API."""

import time
from typing import NamedTuple, Optional

import numpy as np

from groupswarm.dynamics import ActivationSequence, Trajectory, simulate
from groupswarm.errors import InvalidArgumentError
from groupswarm.planning import (
    PLANNERS,
    PlanResult,
    Scenario,
    collision_check,
    plan_numopt,
    plan_pure_control,
    plan_rrt,
    plan_subgroup_parallel,
    plan_subgroup_sequential,
)
from groupswarm.planning.environment import goal_errors
from groupswarm.typing import Clock


def plan(
    scn: Scenario, *, planner: Optional[str] = None, clock: Clock = time.perf_counter
) -> PlanResult:
    """Plan with one of the planners in :data:`groupswarm.planning.PLANNERS`.

    Parameters
    ----------
    scn
        Planning problem.
    planner
        Planner identifier. Defaults to the scenario's config.
    clock
        Monotonic clock used for runtimes and time budgets.

    Returns
    -------
    :
        Plan result. A solved result has been replayed and re-checked.
    """
    planner = scn.config.planner if planner is None else planner
    if planner == "numopt":
        return plan_numopt(scn, clock=clock)
    if planner == "rrt":
        return plan_rrt(scn, mode="original", clock=clock)
    if planner == "rrt-rot":
        return plan_rrt(scn, mode="with_rotation", clock=clock)
    if planner == "pure-control":
        return plan_pure_control(scn, clock=clock)
    if planner == "subgroup-parallel":
        return plan_subgroup_parallel(scn, clock=clock)
    if planner == "subgroup-sequential":
        return plan_subgroup_sequential(scn, clock=clock)
    raise InvalidArgumentError(f"Unknown planner {planner!r}; expected one of {PLANNERS}.")


class Verification(NamedTuple):
    """Outcome of replaying a sequence against a scenario."""

    reached: bool
    collision_free: bool
    max_goal_error: float
    traj: Trajectory

    @property
    def ok(self) -> bool:
        return self.reached and self.collision_free


def verify(scn: Scenario, seq: ActivationSequence) -> Verification:
    """Replay a sequence from the scenario's start and re-check goals and collisions."""
    if seq.n != scn.n:
        raise InvalidArgumentError(f"Sequence is for {seq.n} robots, the scenario has {scn.n}.")
    traj = simulate(scn.starts, seq, params=scn.params, resolution=scn.config.resolution)
    errors = goal_errors(traj.final, scn.goals)
    return Verification(
        reached=bool(np.all(errors <= scn.goal_radius)),
        collision_free=collision_check(traj, scn.env),
        max_goal_error=float(errors.max()),
        traj=traj,
    )

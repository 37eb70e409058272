"""Planning problems, their results, and collision checking."""

import dataclasses
import enum
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np

from groupswarm import defaults
from groupswarm.allocation import GroupAllocation, allocate_groups
from groupswarm.dynamics import (
    ActivationSequence,
    SwarmParams,
    SwarmState,
    Trajectory,
    execution_time,
    path_length,
    simulate,
)
from groupswarm.errors import ScenarioValidationError
from groupswarm.typing import ArrayLike

PLANNERS = (
    "numopt",
    "rrt",
    "rrt-rot",
    "pure-control",
    "subgroup-parallel",
    "subgroup-sequential",
)
"""Planner identifiers."""


class Obstacle(NamedTuple):
    """Closed disc."""

    center: Tuple[float, float]
    radius: float


@dataclasses.dataclass(frozen=True)
class Environment:
    """Rectangular workspace with circular obstacles.

    ``bounds`` is ``(xmin, ymin, xmax, ymax)``. Robots are discs of radius
    ``robot_radius``; contact with an obstacle or the boundary is allowed.
    """

    bounds: Tuple[float, float, float, float] = defaults.BOUNDS
    obstacles: Tuple[Obstacle, ...] = ()
    robot_radius: float = 0.0
    min_separation: Optional[float] = None

    def __post_init__(self) -> None:
        xmin, ymin, xmax, ymax = (float(b) for b in self.bounds)
        if not (xmin < xmax and ymin < ymax):
            raise ScenarioValidationError(f"Empty workspace bounds {self.bounds}.")
        obstacles = tuple(
            Obstacle((float(o[0][0]), float(o[0][1])), float(o[1])) for o in self.obstacles
        )
        for o in obstacles:
            if not o.radius > 0.0:
                raise ScenarioValidationError(f"Obstacle radius must be positive: {o}.")
            if not (xmin <= o.center[0] <= xmax and ymin <= o.center[1] <= ymax):
                raise ScenarioValidationError(f"Obstacle {o} lies outside the bounds.")
        if self.robot_radius < 0.0:
            raise ScenarioValidationError("Robot radius must be nonnegative.")
        object.__setattr__(self, "bounds", (xmin, ymin, xmax, ymax))
        object.__setattr__(self, "obstacles", obstacles)

    def free(self, points: ArrayLike, *, margin: float = 0.0) -> np.ndarray:
        """Which points keep a robot disc clear of walls and obstacles.

        ``margin`` inflates everything by an extra distance.
        """
        points = np.asarray(points, dtype=float).reshape((-1, 2))
        reach = self.robot_radius + margin
        xmin, ymin, xmax, ymax = self.bounds
        ok = (
            (points[:, 0] - reach >= xmin)
            & (points[:, 0] + reach <= xmax)
            & (points[:, 1] - reach >= ymin)
            & (points[:, 1] + reach <= ymax)
        )
        for o in self.obstacles:
            distance = np.linalg.norm(points - np.asarray(o.center), axis=1)
            ok &= distance >= o.radius + reach
        return ok

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Uniform points in the workspace, shape ``(size, 2)``."""
        xmin, ymin, xmax, ymax = self.bounds
        return rng.uniform((xmin, ymin), (xmax, ymax), size=(size, 2))


def collision_check(traj: Trajectory, env: Environment) -> bool:
    """Whether a trajectory stays collision-free at every sample.

    Only the samples are checked; pass a fine ``resolution`` to :func:`simulate`
    to cover the motion between step boundaries.

    Examples
    --------
    >>> positions = np.asarray([[[1.0, 1.0]], [[1.5, 1.0]], [[2.0, 1.0]]])
    >>> traj = Trajectory(positions, np.zeros((3, 1)), np.arange(3))
    >>> collision_check(traj, Environment())
    True
    >>> collision_check(traj, Environment(obstacles=(((1.5, 1.0), 0.2),)))
    False
    """
    positions = np.asarray(traj.positions)
    if not env.free(positions).all():
        return False
    if env.min_separation is not None and positions.shape[1] > 1:
        return separation(positions) >= env.min_separation
    return True


def separation(positions: ArrayLike) -> float:
    """Smallest distance between two robots over all samples, shape ``(T, n, 2)``."""
    positions = np.asarray(positions)
    n = positions.shape[1]
    if n < 2:
        return float("inf")
    i, j = np.triu_indices(n, k=1)
    gaps = np.linalg.norm(positions[:, i] - positions[:, j], axis=-1)
    return float(gaps.min())


def clearance(traj: Trajectory, movers: Sequence[int], others: Sequence[int]) -> float:
    """Smallest distance between a moving and a frozen robot (1-based labels)."""
    if not movers or not others:
        return float("inf")
    positions = np.asarray(traj.positions)
    a = positions[:, np.asarray(movers) - 1][:, :, None]
    b = positions[:, np.asarray(others) - 1][:, None, :]
    return float(np.linalg.norm(a - b, axis=-1).min())


class PlannerConfig(NamedTuple):
    """Planner knobs."""

    planner: str = "rrt-rot"
    max_nodes: int = defaults.MAX_NODES
    max_time: float = defaults.MAX_TIME
    d_max: float = defaults.D_MAX
    goal_bias: float = defaults.GOAL_BIAS
    candidates: int = defaults.EXTENSION_CANDIDATES
    resolution: float = defaults.RESOLUTION
    eps: float = defaults.EPSILON
    steps: int = defaults.NUMOPT_STEPS
    restarts: int = defaults.NUMOPT_RESTARTS
    tol: float = defaults.NUMOPT_TOL
    maxiter: int = defaults.NUMOPT_MAXITER
    subgroups: Tuple[Tuple[int, ...], ...] = ()


@dataclasses.dataclass(frozen=True, eq=False)
class Scenario:
    """Planning problem: move every robot into a disc around its goal."""

    params: SwarmParams
    starts: SwarmState
    goals: np.ndarray
    env: Environment = Environment()
    goal_radius: float = defaults.GOAL_RADIUS
    seed: int = 0
    config: PlannerConfig = PlannerConfig()
    alloc: Optional[GroupAllocation] = None

    def __post_init__(self) -> None:
        n = self.params.n
        alloc = self.alloc if self.alloc is not None else allocate_groups(n)
        if alloc.n != n:
            raise ScenarioValidationError(f"Allocation has {alloc.n} robots, expected {n}.")
        object.__setattr__(self, "alloc", alloc)
        goals = np.asarray(self.goals, dtype=float)
        if goals.shape != (n, 2):
            raise ScenarioValidationError(f"Goals must have shape ({n}, 2), got {goals.shape}.")
        object.__setattr__(self, "goals", goals)
        if self.starts.n != n:
            raise ScenarioValidationError(f"Expected {n} start poses, got {self.starts.n}.")
        if not self.goal_radius > 0.0:
            raise ScenarioValidationError("Goal radius must be positive.")
        if self.config.planner not in PLANNERS:
            raise ScenarioValidationError(f"Unknown planner {self.config.planner!r}.")
        starts_free = self.env.free(np.asarray(self.starts.positions))
        if not starts_free.all():
            robots = (np.flatnonzero(~starts_free) + 1).tolist()
            raise ScenarioValidationError(f"Start positions of robots {robots} collide.")
        goals_free = self.env.free(goals)
        if not goals_free.all():
            robots = (np.flatnonzero(~goals_free) + 1).tolist()
            raise ScenarioValidationError(f"Goal positions of robots {robots} collide.")
        covered = sorted(j for s in self.config.subgroups for j in s)
        if self.config.subgroups and covered != list(range(1, n + 1)):
            raise ScenarioValidationError(
                f"Subgroups {self.config.subgroups} do not partition the swarm."
            )

    @property
    def n(self) -> int:
        return self.params.n

    def replace(self, **changes) -> "Scenario":
        """Copy with some fields changed, e.g. a different seed or config."""
        return dataclasses.replace(self, **changes)


def goal_errors(state: SwarmState, goals: ArrayLike) -> np.ndarray:
    """Distance of every robot to its goal."""
    return np.linalg.norm(np.asarray(state.positions) - np.asarray(goals), axis=-1)


def goals_reached(state: SwarmState, goals: ArrayLike, radius: float) -> bool:
    """Whether every robot is within ``radius`` of its goal."""
    return bool(np.all(goal_errors(state, goals) <= radius))


class Status(str, enum.Enum):
    """Outcome of a planner call."""

    SOLVED = "solved"
    TIMEOUT = "timeout"
    INFEASIBLE = "infeasible"


class Metrics(NamedTuple):
    """Performance figures of a plan."""

    runtime_s: float
    rrt_nodes: int
    path_length: float
    execution_time: float


class PlanResult(NamedTuple):
    """Plan, its replayed trajectory, and metrics."""

    seq: ActivationSequence
    traj: Trajectory
    metrics: Metrics
    status: Status
    message: str = ""

    @property
    def solved(self) -> bool:
        return self.status is Status.SOLVED


def finalize(
    scn: Scenario,
    seq: ActivationSequence,
    *,
    status: Status,
    runtime_s: float,
    rrt_nodes: int = 0,
    message: str = "",
    check_collisions: bool = True,
) -> PlanResult:
    """Replay a plan from the start and package it.

    A plan claimed as solved is demoted to infeasible if the replay misses
    a goal or collides.
    """
    traj = simulate(scn.starts, seq, params=scn.params, resolution=scn.config.resolution)
    if status is Status.SOLVED:
        if not goals_reached(traj.final, scn.goals, scn.goal_radius):
            status = Status.INFEASIBLE
            message = "replay misses the goal region"
        elif check_collisions and not collision_check(traj, scn.env):
            status = Status.INFEASIBLE
            message = "replay collides"
    metrics = Metrics(
        runtime_s=float(runtime_s),
        rrt_nodes=int(rrt_nodes),
        path_length=path_length(traj),
        execution_time=execution_time(seq, params=scn.params),
    )
    return PlanResult(seq, traj, metrics, status, message)


def heading_to(source: ArrayLike, target: ArrayLike) -> float:
    """Absolute heading from one point to another."""
    delta = np.asarray(target, dtype=float) - np.asarray(source, dtype=float)
    return float(np.arctan2(delta[1], delta[0]))

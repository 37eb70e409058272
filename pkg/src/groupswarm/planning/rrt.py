"""Rapidly-exploring random trees over swarm configurations."""

import logging
import time
from typing import Any, Callable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from groupswarm import primitives
from groupswarm.dynamics import (
    ActivationSequence,
    SwarmState,
    concatenate,
    simulate,
)
from groupswarm.planning.environment import (
    PlanResult,
    Scenario,
    Status,
    clearance,
    collision_check,
    finalize,
    goals_reached,
    heading_to,
)
from groupswarm.typing import Clock

logger = logging.getLogger(__name__)

MODES = ("original", "with_rotation")
"""Extension strategies of :func:`plan_rrt`."""

Extension = Optional[Tuple[Any, Any]]
Extend = Callable[[Any, np.ndarray], Extension]


class Tree(NamedTuple):
    """Search tree. Node ``i`` is reached from ``parents[i]`` through ``edges[i]``."""

    states: List[Any]
    keys: List[np.ndarray]
    parents: List[int]
    edges: List[Any]

    @property
    def size(self) -> int:
        return len(self.states)

    def branch(self, index: int) -> List[Any]:
        """Edges from the root to a node."""
        edges = []
        while index > 0:
            edges.append(self.edges[index])
            index = self.parents[index]
        return edges[::-1]


class Growth(NamedTuple):
    """Outcome of :func:`grow`."""

    tree: Tree
    best: int
    status: Status


def grow(
    root: Any,
    *,
    key: Callable[[Any], np.ndarray],
    goal_key: np.ndarray,
    sample: Callable[[np.random.Generator], np.ndarray],
    extend: Extend,
    done: Callable[[Any], bool],
    rng: np.random.Generator,
    goal_bias: float,
    max_nodes: int,
    max_time: float,
    clock: Clock = time.perf_counter,
) -> Growth:
    """Grow a tree until a node satisfies ``done`` or the budget runs out.

    Parameters
    ----------
    root
        Root state.
    key
        Projection of a state onto the search space.
    goal_key
        Goal in the search space.
    sample
        Uniform sampler of the search space.
    extend
        Steers from a state towards a sample. Returns ``None`` on failure.
    done
        Goal test.
    rng
        Random number generator.
    goal_bias
        Probability of sampling the goal.
    max_nodes
        Node budget.
    max_time
        Time budget in units of ``clock``.
    clock
        Monotonic clock.

    Returns
    -------
    :
        The tree, the index of the solving node (or the node nearest to the
        goal), and the status.
    """
    start = clock()
    tree = Tree([root], [key(root)], [-1], [None])
    keys = np.empty((max(1, max_nodes), tree.keys[0].shape[0]))
    keys[0] = tree.keys[0]
    if done(root):
        return Growth(tree, 0, Status.SOLVED)
    iteration = 0
    while tree.size < max_nodes and clock() - start < max_time:
        iteration += 1
        target = goal_key if rng.random() < goal_bias else sample(rng)
        nearest = int(np.argmin(np.linalg.norm(keys[: tree.size] - target, axis=1)))
        extension = extend(tree.states[nearest], target)
        if extension is None:
            continue
        state, edge = extension
        tree.states.append(state)
        tree.keys.append(key(state))
        tree.parents.append(nearest)
        tree.edges.append(edge)
        keys[tree.size - 1] = tree.keys[-1]
        if not tree.size % 1000:
            logger.debug("# nodes = %6d, iteration = %7d", tree.size, iteration)
        if done(state):
            logger.debug("Goal reached with %d nodes.", tree.size)
            return Growth(tree, tree.size - 1, Status.SOLVED)
    best = int(np.argmin(np.linalg.norm(keys[: tree.size] - goal_key, axis=1)))
    logger.debug("Budget exhausted with %d nodes.", tree.size)
    return Growth(tree, best, Status.TIMEOUT)


def position_key(robots: Sequence[int]) -> Callable[[SwarmState], np.ndarray]:
    """Flattened positions of the given robots (1-based)."""
    index = np.asarray(robots, dtype=int) - 1

    def key(state: SwarmState) -> np.ndarray:
        return np.asarray(state.positions)[index].ravel()

    return key


def position_sampler(
    scn: Scenario, count: int
) -> Callable[[np.random.Generator], np.ndarray]:
    """Uniform positions of ``count`` robots inside the workspace."""

    def sample(rng: np.random.Generator) -> np.ndarray:
        return scn.env.sample(rng, count).ravel()

    return sample


def plan_rrt(
    scn: Scenario, *, mode: str = "with_rotation", clock: Clock = time.perf_counter
) -> PlanResult:
    """Plan with a tree over the positions of the whole swarm.

    Parameters
    ----------
    scn
        Planning problem.
    mode
        ``"original"`` applies a random group for a random arc and keeps the
        collision-free candidate nearest to the sample. ``"with_rotation"``
        first turns up to three members of a random group towards their sampled
        positions.
    clock
        Monotonic clock used for the time budget and the runtime.

    Returns
    -------
    :
        Plan result. On timeout the plan to the node nearest to the goal.
    """
    if mode not in MODES:
        raise ValueError(f"Unknown RRT mode {mode!r}; expected one of {MODES}.")
    start = clock()
    config = scn.config
    rng = np.random.default_rng(scn.seed)
    robots = list(range(1, scn.n + 1))
    extend = _extend_original(scn, rng) if mode == "original" else _extend_aimed(scn, rng)
    growth = grow(
        scn.starts,
        key=position_key(robots),
        goal_key=scn.goals.ravel(),
        sample=position_sampler(scn, scn.n),
        extend=extend,
        done=lambda s: goals_reached(s, scn.goals, scn.goal_radius),
        rng=rng,
        goal_bias=config.goal_bias,
        max_nodes=config.max_nodes,
        max_time=config.max_time,
        clock=clock,
    )
    seq = concatenate(growth.tree.branch(growth.best), n=scn.n)
    runtime = clock() - start
    logger.info("RRT (%s) finished: %s, %d nodes.", mode, growth.status.value, growth.tree.size)
    return finalize(
        scn,
        seq,
        status=growth.status,
        runtime_s=runtime,
        rrt_nodes=growth.tree.size,
        message="" if growth.status is Status.SOLVED else "node or time budget exhausted",
    )


def sample_arc(rng: np.random.Generator, d_max: float) -> float:
    """Arc length drawn uniformly from ``(0, d_max]``."""
    return float(d_max * (1.0 - rng.random()))


def _extend_original(scn: Scenario, rng: np.random.Generator) -> Extend:
    config, alloc = scn.config, scn.alloc

    def extend(state: SwarmState, target: np.ndarray) -> Extension:
        best: Extension = None
        best_distance = np.inf
        for _ in range(config.candidates):
            group = int(rng.integers(1, alloc.m + 1))
            arc = sample_arc(rng, config.d_max)
            seq = ActivationSequence.single(alloc.activation(group), arc)
            traj = simulate(state, seq, params=scn.params, resolution=config.resolution)
            if not collision_check(traj, scn.env):
                continue
            distance = np.linalg.norm(np.asarray(traj.final.positions).ravel() - target)
            if distance < best_distance:
                best, best_distance = (traj.final, seq), distance
        return best

    return extend


def aimed_extension(
    scn: Scenario,
    rng: np.random.Generator,
    state: SwarmState,
    target: np.ndarray,
    *,
    movers: Sequence[int],
    frozen: Sequence[int] = (),
) -> Extension:
    """Turn up to three members of a random group towards the sample, then drive.

    ``target`` holds sampled positions of ``movers``. Robots in ``frozen``
    act as obstacles of radius ``robot_radius``.
    """
    config, alloc = scn.config, scn.alloc
    targets = dict(zip(movers, np.asarray(target).reshape((-1, 2))))
    groups = [g for g in range(1, alloc.m) if set(alloc.members(g)) & set(movers)]
    group = int(groups[rng.integers(len(groups))])
    members = [j for j in alloc.members(group) if j in targets]
    chosen = sorted(rng.choice(members, size=min(3, len(members)), replace=False).tolist())
    positions = np.asarray(state.positions)
    headings = {k: heading_to(positions[k - 1], targets[k]) for k in chosen}
    aim, _ = primitives.orientation_control_absolute(
        headings, state=state, alloc=alloc, params=scn.params, eps=config.eps
    )
    distance = float(np.mean([np.linalg.norm(targets[k] - positions[k - 1]) for k in chosen]))
    arc = min(sample_arc(rng, config.d_max), distance)
    drive = primitives.field(group, arc, alloc=alloc)
    seq = concatenate([aim, drive], n=scn.n)
    return checked_extension(scn, state, seq, movers=movers, frozen=frozen)


def _extend_aimed(scn: Scenario, rng: np.random.Generator) -> Extend:
    robots = list(range(1, scn.n + 1))

    def extend(state: SwarmState, target: np.ndarray) -> Extension:
        return aimed_extension(scn, rng, state, target, movers=robots)

    return extend


def checked_extension(
    scn: Scenario,
    state: SwarmState,
    seq: ActivationSequence,
    *,
    movers: Sequence[int],
    frozen: Sequence[int],
) -> Extension:
    """Replay an extension; ``None`` if it collides or passes too close to ``frozen``."""
    if seq.num_steps == 0:
        return None
    traj = simulate(state, seq, params=scn.params, resolution=scn.config.resolution)
    if not collision_check(traj, scn.env):
        return None
    if frozen and clearance(traj, movers, frozen) < 2.0 * scn.env.robot_radius:
        return None
    return traj.final, seq

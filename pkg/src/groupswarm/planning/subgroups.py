"""Planners that move one robot or one subgroup at a time through composite primitives."""

import logging
import time
from typing import List, Optional, Sequence, Tuple

import numpy as np

from groupswarm import primitives
from groupswarm.brackets import Primitive, compile_primitive
from groupswarm.dynamics import (
    ActivationSequence,
    SwarmState,
    concatenate,
    final_state,
)
from groupswarm.errors import ScenarioValidationError
from groupswarm.planning.environment import (
    PlanResult,
    Scenario,
    Status,
    finalize,
    heading_to,
)
from groupswarm.planning.rrt import (
    Extension,
    checked_extension,
    grow,
    position_key,
    position_sampler,
    sample_arc,
)
from groupswarm.typing import Clock

logger = logging.getLogger(__name__)


def plan_pure_control(scn: Scenario, *, clock: Clock = time.perf_counter) -> PlanResult:
    """Move robots one after another, each along a path of its own.

    Every robot gets a tree in its own plane in which the other robots are
    discs at their current positions. Each edge is then driven by
    :func:`groupswarm.primitives.isolate_translate`, which moves that robot
    only. Obstacles are inflated by the excursion bound ``eps``.

    Parameters
    ----------
    scn
        Planning problem with a common turning radius.
    clock
        Monotonic clock.

    Returns
    -------
    :
        Plan result. ``rrt_nodes`` sums the nodes of all trees.
    """
    start = clock()
    config, alloc = scn.config, scn.alloc
    rng = np.random.default_rng(scn.seed)
    state = scn.starts
    parts: List[ActivationSequence] = []
    nodes = 0
    for k in range(1, scn.n + 1):
        path, size, status = _point_path(scn, state, k, rng=rng, clock=clock, start=start)
        nodes += size
        if status is not Status.SOLVED:
            logger.info("Pure control: no path for robot %d.", k)
            seq = concatenate(parts, n=scn.n)
            return finalize(
                scn,
                seq,
                status=status,
                runtime_s=clock() - start,
                rrt_nodes=nodes,
                message=f"no path found for robot {k}",
            )
        rounds = primitives.elimination_rounds(
            primitives.isolation_group(k, alloc=alloc), [k], alloc=alloc
        )
        gain = 2.0**rounds
        for source, target in zip(path[:-1], path[1:]):
            length = float(np.linalg.norm(target - source))
            pieces = max(1, int(np.ceil(length / (config.eps * gain))))
            for _ in range(pieces):
                seq = primitives.isolate_translate(
                    k,
                    d=length / pieces / gain,
                    heading=heading_to(source, target),
                    state=state,
                    alloc=alloc,
                    params=scn.params,
                    eps=config.eps,
                )
                state = final_state(state, seq, params=scn.params)
                parts.append(seq)
        logger.debug("Robot %d placed with %d waypoints.", k, len(path))
    seq = concatenate(parts, n=scn.n)
    logger.info("Pure control finished with %d nodes.", nodes)
    return finalize(
        scn, seq, status=Status.SOLVED, runtime_s=clock() - start, rrt_nodes=nodes
    )


def _point_path(
    scn: Scenario,
    state: SwarmState,
    k: int,
    *,
    rng: np.random.Generator,
    clock: Clock,
    start: float,
) -> Tuple[List[np.ndarray], int, Status]:
    config, env = scn.config, scn.env
    positions = np.asarray(state.positions)
    others = np.delete(positions, k - 1, axis=0)
    goal = scn.goals[k - 1]
    spacing = max(config.resolution, 1e-3) / 2.0

    def free(source: np.ndarray, target: np.ndarray) -> bool:
        count = int(np.ceil(np.linalg.norm(target - source) / spacing)) + 1
        points = np.linspace(source, target, count + 1)
        if not env.free(points, margin=config.eps).all():
            return False
        if others.size:
            gaps = np.linalg.norm(points[:, None, :] - others[None, :, :], axis=-1)
            return bool(gaps.min() >= 2.0 * env.robot_radius + config.eps)
        return True

    def extend(point: np.ndarray, target: np.ndarray) -> Extension:
        delta = target - point
        distance = float(np.linalg.norm(delta))
        if distance == 0.0:
            return None
        reach = min(distance, sample_arc(rng, config.d_max))
        new = point + delta * (reach / distance)
        if not free(point, new):
            return None
        return new, new

    growth = grow(
        positions[k - 1],
        key=lambda p: p,
        goal_key=goal,
        sample=lambda r: env.sample(r, 1).ravel(),
        extend=extend,
        done=lambda p: float(np.linalg.norm(p - goal)) <= scn.goal_radius,
        rng=rng,
        goal_bias=config.goal_bias,
        max_nodes=config.max_nodes,
        max_time=config.max_time - (clock() - start),
        clock=clock,
    )
    path = [positions[k - 1]] + growth.tree.branch(growth.best)
    return path, growth.tree.size, growth.status


def plan_subgroup_parallel(
    scn: Scenario,
    *,
    subgroups: Optional[Sequence[Sequence[int]]] = None,
    clock: Clock = time.perf_counter,
) -> PlanResult:
    """One tree over the positions of all subgroups.

    Each extension picks a subgroup, aims its members at the sample and
    drives them with the subgroup's primitive.

    Parameters
    ----------
    scn
        Planning problem.
    subgroups
        Disjoint cover of the swarm. Defaults to the scenario's config.
    clock
        Monotonic clock.

    Raises
    ------
    NoPrimitiveError
        If a subgroup has no primitive.
    """
    start = clock()
    groups = _subgroups(scn, subgroups)
    prims = [_compile(scn, s) for s in groups]
    rng = np.random.default_rng(scn.seed)
    seq, nodes, status = _plan_subgroups(
        scn, scn.starts, prims, frozen=(), rng=rng, clock=clock, start=start
    )
    logger.info("Parallel subgroups finished: %s, %d nodes.", status.value, nodes)
    return finalize(
        scn,
        seq,
        status=status,
        runtime_s=clock() - start,
        rrt_nodes=nodes,
        message="" if status is Status.SOLVED else "node or time budget exhausted",
    )


def plan_subgroup_sequential(
    scn: Scenario,
    *,
    subgroups: Optional[Sequence[Sequence[int]]] = None,
    clock: Clock = time.perf_counter,
) -> PlanResult:
    """One tree per subgroup, planned and executed in the given order.

    Robots outside the current subgroup are obstacles at their current
    positions.

    Parameters
    ----------
    scn
        Planning problem.
    subgroups
        Disjoint cover of the swarm. Defaults to the scenario's config.
    clock
        Monotonic clock.

    Raises
    ------
    NoPrimitiveError
        If a subgroup has no primitive.
    """
    start = clock()
    groups = _subgroups(scn, subgroups)
    prims = [_compile(scn, s) for s in groups]
    rng = np.random.default_rng(scn.seed)
    state = scn.starts
    parts: List[ActivationSequence] = []
    nodes = 0
    status = Status.SOLVED
    for prim in prims:
        frozen = [j for j in range(1, scn.n + 1) if j not in prim.affected]
        seq, size, status = _plan_subgroups(
            scn, state, [prim], frozen=frozen, rng=rng, clock=clock, start=start
        )
        nodes += size
        parts.append(seq)
        state = final_state(state, seq, params=scn.params)
        if status is not Status.SOLVED:
            logger.info("Sequential subgroups: %s failed.", sorted(prim.affected))
            break
    logger.info("Sequential subgroups finished: %s, %d nodes.", status.value, nodes)
    return finalize(
        scn,
        concatenate(parts, n=scn.n),
        status=status,
        runtime_s=clock() - start,
        rrt_nodes=nodes,
        message="" if status is Status.SOLVED else "node or time budget exhausted",
    )


def _subgroups(
    scn: Scenario, subgroups: Optional[Sequence[Sequence[int]]]
) -> List[Tuple[int, ...]]:
    groups = scn.config.subgroups if subgroups is None else subgroups
    if not groups:
        return [tuple(range(1, scn.n + 1))]
    groups = [tuple(sorted(int(j) for j in s)) for s in groups]
    if sorted(j for s in groups for j in s) != list(range(1, scn.n + 1)):
        raise ScenarioValidationError(f"Subgroups {groups} do not partition the swarm.")
    return groups


def _compile(scn: Scenario, subgroup: Sequence[int]) -> Primitive:
    return compile_primitive(subgroup, alloc=scn.alloc, params=scn.params, eps=scn.config.eps)


def _plan_subgroups(
    scn: Scenario,
    state: SwarmState,
    prims: Sequence[Primitive],
    *,
    frozen: Sequence[int],
    rng: np.random.Generator,
    clock: Clock,
    start: float,
) -> Tuple[ActivationSequence, int, Status]:
    config = scn.config
    movers = sorted(j for prim in prims for j in prim.affected)
    column = {j: i for i, j in enumerate(movers)}
    goals = scn.goals[np.asarray(movers) - 1]
    key = position_key(movers)

    def goal_gaps(node: SwarmState) -> np.ndarray:
        return np.linalg.norm(key(node).reshape((-1, 2)) - goals, axis=1)

    def extend(node: SwarmState, target: np.ndarray) -> Extension:
        prim = prims[int(rng.integers(len(prims)))]
        members = sorted(prim.affected)
        targets = np.asarray(target).reshape((-1, 2))
        positions = np.asarray(node.positions)
        headings = {k: heading_to(positions[k - 1], targets[column[k]]) for k in members}
        distance = float(
            np.mean([np.linalg.norm(targets[column[k]] - positions[k - 1]) for k in members])
        )
        d = min(sample_arc(rng, config.d_max), distance)
        if d <= 0.0:
            return None
        seq = prim.compile(d, state=node, headings=headings)
        return checked_extension(scn, node, seq, movers=members, frozen=frozen)

    growth = grow(
        state,
        key=key,
        goal_key=goals.ravel(),
        sample=position_sampler(scn, len(movers)),
        extend=extend,
        done=lambda s: bool(np.all(goal_gaps(s) <= scn.goal_radius)),
        rng=rng,
        goal_bias=config.goal_bias,
        max_nodes=config.max_nodes,
        max_time=config.max_time - (clock() - start),
        clock=clock,
    )
    seq = concatenate(growth.tree.branch(growth.best), n=scn.n)
    return seq, growth.tree.size, growth.status

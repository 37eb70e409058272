"""Planning by optimising the durations of a random group schedule."""

import logging
import math
import time
from typing import NamedTuple, Optional, Sequence, Tuple

import jax
import jax.numpy as jnp
import numpy as np
import scipy.optimize

from groupswarm import defaults
from groupswarm.allocation import GroupAllocation
from groupswarm.dynamics import (
    ActivationSequence,
    SwarmParams,
    SwarmState,
    concatenate,
    final_state,
    simulate,
)
from groupswarm.errors import InvalidArgumentError
from groupswarm.planning.environment import (
    PlanResult,
    Scenario,
    Status,
    collision_check,
    finalize,
    goal_errors,
)
from groupswarm.typing import ArrayLike, Clock
from groupswarm.utils import autodiff

logger = logging.getLogger(__name__)

_SCHEDULE_ATTEMPTS = 100
"""Draws per restart when looking for a schedule that moves every robot."""


def forward_positions(
    durations: ArrayLike,
    *,
    activations: ArrayLike,
    positions: ArrayLike,
    orientations: ArrayLike,
    radii: ArrayLike,
) -> ArrayLike:
    """Final positions, flattened, as a differentiable function of the durations.

    Orientations are not wrapped, so the map is smooth.
    """

    def body(carry, step):
        p, theta = carry
        activation, d = step
        active = activation > 0
        heading = jnp.stack([jnp.cos(theta), jnp.sin(theta)], axis=-1)
        p = jnp.where(active[:, None], p + d * heading, p)
        theta = jnp.where(active, theta, theta + d / radii)
        return (p, theta), None

    (p, _), _ = jax.lax.scan(body, (positions, orientations), (activations, durations))
    return p.ravel()


class Optimum(NamedTuple):
    """Durations of a schedule and the largest remaining goal distance."""

    durations: np.ndarray
    residual: float


def optimize_schedule(
    state: SwarmState,
    targets: ArrayLike,
    activations: np.ndarray,
    *,
    params: SwarmParams,
    x0: np.ndarray,
    maxiter: int,
    tol: float = defaults.NUMOPT_TOL,
) -> Optimum:
    """Shortest-path durations for a fixed schedule.

    A bounded least-squares solve first drives the final positions onto
    ``targets``. From that feasible point SLSQP minimises the total path length
    subject to the same equality constraints; if it drifts off the constraints
    its result is polished by another least-squares solve, and kept only if it
    is feasible and shorter. With fewer steps than position constraints only
    the residual is minimised.

    Parameters
    ----------
    state
        Initial state.
    targets
        Target positions, shape ``(n, 2)``.
    activations
        Schedule, shape ``(K, n)``.
    params
        Swarm parameters.
    x0
        Initial durations, shape ``(K,)``.
    maxiter
        Iteration limit of every optimiser run.
    tol
        Largest accepted distance of a robot to its target.

    Returns
    -------
    :
        Durations and the largest distance of a robot to its target.
    """
    kwargs = dict(
        activations=jnp.asarray(activations),
        positions=jnp.asarray(state.positions),
        orientations=jnp.asarray(state.orientations),
        radii=jnp.asarray(params.radii),
    )
    positions = autodiff.numpy_function(forward_positions, **kwargs)
    jacobian = autodiff.numpy_jacobian(forward_positions, **kwargs)
    target = np.asarray(targets, dtype=float).ravel()
    num_steps = activations.shape[0]

    def residual(t: np.ndarray) -> np.ndarray:
        return positions(t) - target

    def worst(t: np.ndarray) -> float:
        return float(np.linalg.norm(residual(t).reshape((-1, 2)), axis=1).max())

    def solve_residual(t0: np.ndarray) -> np.ndarray:
        result = scipy.optimize.least_squares(
            residual,
            np.clip(t0, 0.0, None),
            jac=jacobian,
            bounds=(0.0, np.inf),
            xtol=1e-12,
            ftol=1e-12,
            gtol=1e-12,
            max_nfev=maxiter,
        )
        return np.clip(np.asarray(result.x, dtype=float), 0.0, None)

    feasible = solve_residual(np.asarray(x0, dtype=float))
    if num_steps < target.shape[0] or worst(feasible) > tol:
        return Optimum(feasible, worst(feasible))

    weights = activations.sum(axis=1).astype(float)
    result = scipy.optimize.minimize(
        lambda t: (float(weights @ t), weights),
        feasible,
        jac=True,
        method="SLSQP",
        bounds=[(0.0, None)] * num_steps,
        constraints=[{"type": "eq", "fun": residual, "jac": jacobian}],
        options={"maxiter": maxiter, "ftol": 1e-10},
    )
    shortened = np.clip(np.asarray(result.x, dtype=float), 0.0, None)
    if worst(shortened) > tol:
        shortened = solve_residual(shortened)
    if worst(shortened) <= tol and weights @ shortened < weights @ feasible:
        feasible = shortened
    return Optimum(feasible, worst(feasible))


def random_schedule(
    rng: np.random.Generator,
    steps: int,
    *,
    alloc: GroupAllocation,
    movers: Optional[Sequence[int]] = None,
) -> np.ndarray:
    """Random activations, shape ``(steps, n)``, over all groups.

    Schedules are redrawn until every robot in ``movers`` translates at least
    once, if that happens within a bounded number of draws.
    """
    must_move = np.asarray(sorted(movers or ()), dtype=int) - 1
    schedule = alloc.matrix[rng.integers(0, alloc.m, size=steps)]
    for _ in range(_SCHEDULE_ATTEMPTS):
        if must_move.size == 0 or schedule[:, must_move].any(axis=0).all():
            break
        schedule = alloc.matrix[rng.integers(0, alloc.m, size=steps)]
    return np.asarray(schedule, dtype=np.int8)


def _duration_scales(
    state: SwarmState, targets: ArrayLike, *, params: SwarmParams, steps: int
) -> Tuple[float, float]:
    """Upper bounds of the initial durations, cycled over the restarts.

    The first spreads the mean goal distance over the schedule, the second
    allows half turns of the widest robot so that robots can head back.
    """
    distance = float(np.mean(np.linalg.norm(np.asarray(state.positions) - targets, axis=1)))
    return (2.0 * max(distance, 1.0) / steps, math.pi * max(params.radii))


def _initial_durations(rng: np.random.Generator, steps: int, scale: float) -> np.ndarray:
    return rng.uniform(0.0, scale, size=steps)


def plan_numopt(
    scn: Scenario,
    *,
    steps: Optional[int] = None,
    restarts: Optional[int] = None,
    clock: Clock = time.perf_counter,
) -> PlanResult:
    """Plan by optimising the durations of a random group schedule.

    Parameters
    ----------
    scn
        Planning problem. Obstacles are ignored by the optimiser, but a plan
        whose replay collides is rejected and the schedule redrawn.
    steps
        Number of control steps ``K``. Defaults to the scenario's config.
    restarts
        Number of schedules to try. Defaults to the scenario's config.
    clock
        Monotonic clock.

    Returns
    -------
    :
        Plan result. Zero-duration steps are kept in the sequence.
    """
    config = scn.config
    steps = config.steps if steps is None else steps
    restarts = config.restarts if restarts is None else restarts
    if steps < 1:
        raise InvalidArgumentError(f"K must be >= 1, got {steps}.")
    start = clock()
    rng = np.random.default_rng(scn.seed)
    errors = goal_errors(scn.starts, scn.goals)
    if np.all(errors <= config.tol):
        return finalize(
            scn, ActivationSequence.empty(scn.n), status=Status.SOLVED, runtime_s=clock() - start
        )
    movers = (np.flatnonzero(errors > config.tol) + 1).tolist()
    scales = _duration_scales(scn.starts, scn.goals, params=scn.params, steps=steps)

    best: Optional[ActivationSequence] = None
    best_residual = np.inf
    status = Status.INFEASIBLE
    for attempt in range(max(1, restarts)):
        if clock() - start > config.max_time:
            status = Status.TIMEOUT
            break
        activations = random_schedule(rng, steps, alloc=scn.alloc, movers=movers)
        optimum = optimize_schedule(
            scn.starts,
            scn.goals,
            activations,
            params=scn.params,
            x0=_initial_durations(rng, steps, scales[attempt % len(scales)]),
            maxiter=config.maxiter,
            tol=config.tol,
        )
        seq = ActivationSequence(activations, optimum.durations)
        logger.debug("Attempt %d: residual %.3g.", attempt, optimum.residual)
        if optimum.residual <= config.tol:
            traj = simulate(scn.starts, seq, params=scn.params, resolution=config.resolution)
            if collision_check(traj, scn.env):
                logger.info("Numerical optimisation solved after %d attempts.", attempt + 1)
                return finalize(scn, seq, status=Status.SOLVED, runtime_s=clock() - start)
            logger.debug("Attempt %d collides; redrawing the schedule.", attempt)
        if optimum.residual < best_residual:
            best, best_residual = seq, optimum.residual

    message = f"best residual {best_residual:.3g} after {max(1, restarts)} schedules"
    logger.info("Numerical optimisation failed: %s.", message)
    if best is None:
        best = ActivationSequence.empty(scn.n)
    return finalize(scn, best, status=status, runtime_s=clock() - start, message=message)


def optimize_primitive(
    subgroup: Sequence[int],
    *,
    state: SwarmState,
    alloc: GroupAllocation,
    params: SwarmParams,
    heading: float = 0.0,
    distance: float = 1.0,
    step: float = 0.2,
    steps: int = defaults.NUMOPT_STEPS,
    restarts: int = defaults.NUMOPT_RESTARTS,
    tol: float = defaults.NUMOPT_TOL,
    maxiter: int = defaults.NUMOPT_MAXITER,
    rng: Optional[np.random.Generator] = None,
) -> ActivationSequence:
    """Optimised primitive that moves ``subgroup`` by ``distance`` along ``heading``.

    Each repetition optimises a random schedule of ``steps`` steps that moves
    the subgroup by ``step`` while every other robot returns to its start.
    Repetitions continue until ``distance`` is covered. Targets are absolute,
    so residuals do not accumulate over repetitions.

    Parameters
    ----------
    restarts
        Schedules tried per repetition, the first included.

    Raises
    ------
    InvalidArgumentError
        If a repetition fails for every schedule.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    direction = np.asarray([np.cos(heading), np.sin(heading)])
    moving = np.zeros(alloc.n, dtype=bool)
    moving[np.asarray(subgroup, dtype=int) - 1] = True
    origin = np.asarray(state.positions)
    repetitions = max(1, int(round(distance / step)))

    parts = []
    current = state
    for repetition in range(1, repetitions + 1):
        travelled = distance * repetition / repetitions
        targets = origin + np.where(moving[:, None], travelled * direction, 0.0)
        # half turns first: every robot outside the subgroup has to come back
        scales = _duration_scales(current, targets, params=params, steps=steps)[::-1]
        for attempt in range(max(1, restarts)):
            activations = random_schedule(rng, steps, alloc=alloc, movers=subgroup)
            optimum = optimize_schedule(
                current,
                targets,
                activations,
                params=params,
                x0=_initial_durations(rng, steps, scales[attempt % len(scales)]),
                maxiter=maxiter,
                tol=tol,
            )
            logger.debug(
                "Repetition %d, attempt %d: residual %.3g.", repetition, attempt, optimum.residual
            )
            if optimum.residual <= tol:
                break
        else:
            raise InvalidArgumentError(
                f"Repetition {repetition} missed its target by {optimum.residual:.3g}."
            )
        seq = ActivationSequence(activations, optimum.durations)
        parts.append(seq)
        current = final_state(current, seq, params=params)
    return concatenate(parts, n=alloc.n)

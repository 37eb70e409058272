"""Tests for schedule optimisation."""

import jax.numpy as jnp
import numpy as np
import pytest

from groupswarm import dynamics
from groupswarm.allocation import allocate_groups
from groupswarm.errors import InvalidArgumentError
from groupswarm.harness.batch import CountingClock
from groupswarm.harness.scenario import load_bundled
from groupswarm.planning import Environment, PlannerConfig, Scenario, Status, plan_numopt
from groupswarm.planning.numopt import (
    forward_positions,
    optimize_primitive,
    optimize_schedule,
    random_schedule,
)


def _single_robot(goal, **config):
    return Scenario(
        params=dynamics.SwarmParams(n=1),
        starts=dynamics.make_state([[0.0, 0.0]], [0.0]),
        goals=np.asarray([goal]),
        env=Environment(bounds=(-10.0, -10.0, 10.0, 10.0)),
        config=PlannerConfig(planner="numopt", **config),
    )


def test_forward_positions_match_the_dynamics():
    rng = np.random.default_rng(4)
    alloc = allocate_groups(5)
    params = dynamics.SwarmParams(n=5, r_overrides=(1.0, 1.5, 0.7, 2.0, 1.2))
    state = dynamics.make_state(rng.normal(size=(5, 2)), rng.uniform(0, 6, size=5))
    activations = random_schedule(rng, 9, alloc=alloc)
    durations = rng.uniform(0.0, 2.0, size=9)
    expected = dynamics.final_state(
        state, dynamics.ActivationSequence(activations, durations), params=params
    )
    positions = forward_positions(
        jnp.asarray(durations),
        activations=jnp.asarray(activations),
        positions=state.positions,
        orientations=state.orientations,
        radii=jnp.asarray(params.radii),
    )
    assert jnp.allclose(positions, expected.positions.ravel())


def test_random_schedule_moves_every_requested_robot():
    rng = np.random.default_rng(0)
    alloc = allocate_groups(6)
    schedule = random_schedule(rng, 5, alloc=alloc, movers=[1, 2, 3, 4, 5, 6])
    assert schedule.shape == (5, 6)
    assert schedule.any(axis=0).all()


def test_optimize_schedule_recovers_a_feasible_target():
    params = dynamics.SwarmParams(n=2)
    state = dynamics.make_state([[0.0, 0.0], [0.0, 3.0]])
    activations = np.asarray([[1, 0], [0, 1], [1, 0], [0, 1]], dtype=np.int8)
    reference = np.asarray([1.0, 0.5, 0.8, 0.3])
    targets = dynamics.final_state(
        state, dynamics.ActivationSequence(activations, reference), params=params
    ).positions
    optimum = optimize_schedule(
        state, targets, activations, params=params, x0=1.1 * reference, maxiter=200
    )
    assert optimum.residual < 1e-6
    assert np.all(optimum.durations >= 0.0)
    assert optimum.durations.sum() <= reference.sum() + 1e-4


def test_single_step_plan_is_exact():
    result = plan_numopt(_single_robot([3.0, 0.0]), steps=1)
    assert result.status is Status.SOLVED
    assert result.seq.num_steps == 1
    assert result.metrics.path_length == pytest.approx(3.0, abs=1e-6)
    assert np.allclose(result.traj.final.positions, [[3.0, 0.0]], atol=1e-6)


def test_plan_at_the_goal_is_empty():
    result = plan_numopt(_single_robot([0.0, 0.0]))
    assert result.status is Status.SOLVED
    assert result.seq.num_steps == 0
    assert result.metrics.path_length == 0.0


def test_unreachable_target_is_infeasible():
    # a single forward step cannot move sideways
    result = plan_numopt(_single_robot([0.0, 5.0]), steps=1, restarts=2)
    assert result.status is Status.INFEASIBLE
    assert "best residual" in result.message


def test_plan_needs_a_step():
    with pytest.raises(InvalidArgumentError):
        plan_numopt(_single_robot([3.0, 0.0]), steps=0)


def test_optimised_primitive_moves_the_subgroup():
    alloc = allocate_groups(6)
    params = dynamics.SwarmParams(n=6)
    state = dynamics.make_state(np.zeros((6, 2)))
    seq = optimize_primitive(
        [4, 5],
        state=state,
        alloc=alloc,
        params=params,
        distance=0.4,
        step=0.2,
        rng=np.random.default_rng(1),
    )
    final = dynamics.final_state(state, seq, params=params)
    expected = np.zeros((6, 2))
    expected[3:5, 0] = 0.4
    assert np.allclose(final.positions, expected, atol=1e-3)


def test_optimize_schedule_warm_starts_far_from_the_target():
    # robots outside the moving group must turn around to come back
    alloc = allocate_groups(6)
    params = dynamics.SwarmParams(n=6)
    state = dynamics.make_state(np.zeros((6, 2)))
    targets = np.zeros((6, 2))
    targets[3:5, 0] = 0.2
    rng = np.random.default_rng(2)
    best = np.inf
    for _ in range(10):
        activations = random_schedule(rng, 35, alloc=alloc, movers=[4, 5])
        optimum = optimize_schedule(
            state,
            targets,
            activations,
            params=params,
            x0=rng.uniform(0.0, np.pi, size=35),
            maxiter=500,
        )
        best = min(best, optimum.residual)
        if optimum.residual <= 1e-3:
            break
    assert best <= 1e-3


def test_bundled_scenario_is_feasible():
    scn = load_bundled("ec1")
    result = plan_numopt(scn, restarts=20, clock=CountingClock())
    assert result.status is Status.SOLVED
    final = np.asarray(result.traj.final.positions)
    assert np.all(np.linalg.norm(final - scn.goals, axis=1) <= scn.config.tol + 1e-9)


@pytest.mark.parametrize("seed", [0, 5])
def test_plans_are_deterministic_per_seed(seed):
    scn = _single_robot([2.0, 2.0], steps=6, restarts=3).replace(seed=seed)
    a = plan_numopt(scn, clock=CountingClock())
    b = plan_numopt(scn, clock=CountingClock())
    assert a.status is b.status
    assert a.metrics == b.metrics
    assert np.array_equal(a.seq.activations, b.seq.activations)
    assert np.array_equal(a.seq.arcs, b.seq.arcs)

"""Tests for workspaces, scenarios, and plan finalisation."""

import numpy as np
import pytest
import pytest_cases

from groupswarm import dynamics
from groupswarm.errors import ScenarioValidationError
from groupswarm.planning import (
    Environment,
    PlannerConfig,
    Scenario,
    Status,
    collision_check,
    finalize,
)
from groupswarm.planning.environment import clearance, separation


def _traj(points):
    positions = np.asarray(points, dtype=float)[:, None, :]
    return dynamics.Trajectory(positions, np.zeros(positions.shape[:2]), np.arange(len(points)))


def case_touching_obstacle():
    env = Environment(obstacles=(((3.0, 5.0), 1.0),), robot_radius=0.5)
    return env, [[1.5, 5.0]], True


def case_overlapping_obstacle():
    env = Environment(obstacles=(((3.0, 5.0), 1.0),), robot_radius=0.5)
    return env, [[1.0, 5.0], [1.6, 5.0]], False


def case_touching_boundary():
    return Environment(robot_radius=1.0), [[1.0, 10.0], [19.0, 19.0]], True


def case_leaving_workspace():
    return Environment(), [[10.0, 10.0], [20.5, 10.0]], False


@pytest_cases.parametrize_with_cases("env, points, expected", cases=".")
def test_collision_check(env, points, expected):
    assert collision_check(_traj(points), env) is expected


def test_robot_separation():
    positions = np.asarray([[[0.0, 0.0], [3.0, 0.0]], [[1.0, 0.0], [2.0, 0.0]]])
    traj = dynamics.Trajectory(positions, np.zeros((2, 2)), np.arange(2))
    assert separation(positions) == pytest.approx(1.0)
    assert clearance(traj, [1], [2]) == pytest.approx(1.0)
    assert clearance(traj, [1], []) == float("inf")
    assert collision_check(traj, Environment(min_separation=0.5))
    assert not collision_check(traj, Environment(min_separation=1.5))


def test_invalid_environments():
    with pytest.raises(ScenarioValidationError):
        Environment(bounds=(0.0, 0.0, 0.0, 1.0))
    with pytest.raises(ScenarioValidationError):
        Environment(obstacles=(((30.0, 5.0), 1.0),))
    with pytest.raises(ScenarioValidationError):
        Environment(obstacles=(((3.0, 5.0), 0.0),))


def _scenario(**changes):
    fields = dict(
        params=dynamics.SwarmParams(n=2),
        starts=dynamics.make_state([[1.0, 1.0], [1.0, 4.0]]),
        goals=np.asarray([[8.0, 1.0], [8.0, 4.0]]),
        env=Environment(obstacles=(((5.0, 10.0), 2.0),)),
    )
    fields.update(changes)
    return Scenario(**fields)


def test_scenario_defaults():
    scn = _scenario()
    assert scn.n == 2
    assert scn.alloc.n == 2
    assert scn.config.planner == "rrt-rot"
    assert scn.replace(seed=3).seed == 3


@pytest.mark.parametrize(
    "changes",
    [
        {"goals": np.asarray([[5.0, 10.0], [8.0, 4.0]])},
        {"starts": dynamics.make_state([[1.0, 1.0], [-1.0, 4.0]])},
        {"goals": np.zeros((3, 2))},
        {"goal_radius": 0.0},
        {"config": PlannerConfig(planner="dijkstra")},
        {"config": PlannerConfig(subgroups=((1,),))},
        {"starts": dynamics.make_state([[1.0, 1.0]])},
    ],
)
def test_invalid_scenarios(changes):
    with pytest.raises(ScenarioValidationError):
        _scenario(**changes)


def test_finalize_demotes_plans_that_miss_the_goal():
    scn = _scenario()
    result = finalize(scn, dynamics.ActivationSequence.empty(2), status=Status.SOLVED, runtime_s=1.0)
    assert result.status is Status.INFEASIBLE
    assert result.message
    assert result.metrics.path_length == 0.0


def test_finalize_reports_metrics():
    scn = _scenario(goals=np.asarray([[3.0, 1.0], [1.0, 4.0]]))
    seq = dynamics.ActivationSequence.single(np.array([1, 0]), 2.0)
    result = finalize(scn, seq, status=Status.SOLVED, runtime_s=0.5, rrt_nodes=7)
    assert result.solved
    assert result.metrics.rrt_nodes == 7
    assert result.metrics.path_length == pytest.approx(2.0)
    assert result.metrics.execution_time == pytest.approx(2.0)


def test_finalize_demotes_colliding_plans():
    scn = _scenario(
        goals=np.asarray([[9.0, 1.0], [1.0, 4.0]]), env=Environment(obstacles=(((5.0, 1.0), 1.0),))
    )
    seq = dynamics.ActivationSequence.single(np.array([1, 0]), 8.0)
    result = finalize(scn, seq, status=Status.SOLVED, runtime_s=0.0)
    assert result.status is Status.INFEASIBLE
    assert "collides" in result.message

"""Tests for the swarm dynamics."""

import jax.numpy as jnp
import numpy as np
import pytest
import pytest_cases

from groupswarm import dynamics
from groupswarm.allocation import allocate_groups
from groupswarm.errors import InvalidArgumentError
from groupswarm.utils import angles


def random_sequence(rng, *, n, steps):
    alloc = allocate_groups(n)
    groups = rng.integers(0, alloc.m, size=steps)
    return dynamics.ActivationSequence(
        alloc.matrix[groups].astype(np.int8), rng.uniform(0.0, 2.0, size=steps)
    )


@pytest_cases.parametrize("seed", [0, 1, 2])
@pytest_cases.parametrize("n", [1, 3, 6])
def case_sequence(seed, n):
    rng = np.random.default_rng(seed)
    params = dynamics.SwarmParams(n=n)
    state = dynamics.make_state(rng.uniform(-5, 5, size=(n, 2)), rng.uniform(0, 6, size=n))
    return state, random_sequence(rng, n=n, steps=7), params


@pytest_cases.parametrize_with_cases("state, seq, params", cases=".")
def test_simulate_agrees_with_step(state, seq, params):
    expected = state
    for cs in seq.steps:
        expected = dynamics.step(expected, cs, params=params)
    traj = dynamics.simulate(state, seq, params=params)
    assert jnp.allclose(traj.final.positions, expected.positions)
    assert angles.headings_close(traj.final.orientations, expected.orientations, tol=1e-9)


@pytest_cases.parametrize_with_cases("state, seq, params", cases=".")
def test_boundaries_index_step_states(state, seq, params):
    coarse = dynamics.simulate(state, seq, params=params, resolution=None)
    fine = dynamics.simulate(state, seq, params=params, resolution=0.3)
    assert fine.num_samples == fine.boundaries[-1] + 1
    assert jnp.allclose(fine.positions[fine.boundaries], coarse.positions)


@pytest_cases.parametrize_with_cases("state, seq, params", cases=".")
def test_zero_arc_steps_are_identities(state, seq, params):
    idle = dynamics.ActivationSequence(np.ones((3, params.n), dtype=np.int8), np.zeros(3))
    padded = dynamics.concatenate([seq, idle], n=params.n)
    a = dynamics.final_state(state, seq, params=params)
    b = dynamics.final_state(state, padded, params=params)
    assert jnp.allclose(a.positions, b.positions)
    assert jnp.allclose(a.orientations, b.orientations)
    assert padded.num_steps == seq.num_steps + 3
    assert padded.drop_idle().num_steps == seq.num_steps


@pytest_cases.parametrize_with_cases("state, seq, params", cases=".")
def test_net_rotation_is_state_independent(state, seq, params):
    final = dynamics.final_state(state, seq, params=params)
    turned = angles.wrap(state.orientations + dynamics.net_rotation(seq, params=params))
    assert angles.headings_close(final.orientations, turned, tol=1e-9)


@pytest_cases.parametrize_with_cases("state, seq, params", cases=".")
def test_simulation_commutes_with_rigid_motions(state, seq, params):
    phi, shift = 0.9, jnp.asarray([3.0, -2.0])
    rot = jnp.asarray([[np.cos(phi), -np.sin(phi)], [np.sin(phi), np.cos(phi)]])
    moved = dynamics.make_state(state.positions @ rot.T + shift, state.orientations + phi)
    expected = dynamics.final_state(state, seq, params=params)
    final = dynamics.final_state(moved, seq, params=params)
    assert jnp.allclose(final.positions, expected.positions @ rot.T + shift, atol=1e-9)
    assert angles.headings_close(
        final.orientations, angles.wrap(expected.orientations + phi), tol=1e-9
    )


@pytest_cases.parametrize_with_cases("state, seq, params", cases=".")
def test_simulation_composes(state, seq, params):
    rng = np.random.default_rng(seq.num_steps)
    tail = random_sequence(rng, n=params.n, steps=5)
    whole = dynamics.final_state(
        state, dynamics.concatenate([seq, tail], n=params.n), params=params
    )
    halfway = dynamics.final_state(state, seq, params=params)
    chained = dynamics.final_state(halfway, tail, params=params)
    assert jnp.allclose(whole.positions, chained.positions, atol=1e-9)
    assert angles.headings_close(whole.orientations, chained.orientations, tol=1e-9)


@pytest.mark.parametrize("seed", range(100))
def test_single_step_matches_closed_form(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 15))
    params = dynamics.SwarmParams(n=n, r_overrides=tuple(rng.uniform(0.5, 2.0, size=n)))
    state = dynamics.make_state(rng.uniform(-10, 10, size=(n, 2)), rng.uniform(0, 6, size=n))
    active = rng.integers(0, 2, size=n).astype(bool)
    arc = float(rng.uniform(0.0, 3.0))
    seq = dynamics.ActivationSequence.single(active.astype(np.int8), arc)
    final = dynamics.final_state(state, seq, params=params)
    p, theta = np.asarray(state.positions), np.asarray(state.orientations)
    heading = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    positions = np.where(active[:, None], p + arc * heading, p)
    orientations = np.where(active, theta, theta + arc / np.asarray(params.radii))
    assert jnp.allclose(final.positions, positions, atol=1e-9)
    assert angles.headings_close(final.orientations, angles.wrap(orientations), tol=1e-9)


def test_rollouts_share_power_of_two_buckets():
    rng = np.random.default_rng(7)
    shapes = set()
    for steps in range(5, 9):
        activations, arcs = dynamics._pad(random_sequence(rng, n=4, steps=steps))
        shapes.add((activations.shape, arcs.shape))
        assert np.all(np.asarray(arcs)[steps:] == 0.0)
    assert shapes == {((8, 4), (8,))}


def test_reverse_direction_of_a_single_translation():
    params = dynamics.SwarmParams(n=2)
    state = dynamics.make_state([[0.0, 0.0], [3.0, 0.0]])
    seq = dynamics.ActivationSequence.single(np.array([1, 0]), 1.0)
    reverse = seq.reverse_direction(params=params)
    final = dynamics.final_state(state, reverse, params=params)
    assert jnp.allclose(final.positions, jnp.asarray([[-1.0, 0.0], [3.0, 0.0]]))
    expected = dynamics.net_rotation(seq, params=params)
    assert angles.headings_close(final.orientations, expected, tol=1e-9)


def test_rotating_robots_stay_in_place():
    params = dynamics.SwarmParams(n=2, r=2.0)
    state = dynamics.make_state([[1.0, 1.0], [2.0, 2.0]], [0.0, 1.0])
    seq = dynamics.ActivationSequence.single(np.array([0, 1]), 1.0)
    final = dynamics.final_state(state, seq, params=params)
    assert jnp.allclose(final.positions[0], state.positions[0])
    assert jnp.allclose(final.orientations[0], 0.5)
    assert jnp.allclose(final.positions[1], state.positions[1] + jnp.asarray([np.cos(1.0), np.sin(1.0)]))


def test_distinct_turning_radii():
    params = dynamics.SwarmParams(n=2, r_overrides=(1.0, 2.0))
    seq = dynamics.ActivationSequence.single(np.zeros(2), 1.0)
    assert jnp.allclose(dynamics.net_rotation(seq, params=params), jnp.asarray([1.0, 0.5]))


def test_path_length_and_execution_time():
    params = dynamics.SwarmParams(n=3, u_nominal=2.0)
    state = dynamics.make_state(np.zeros((3, 2)))
    seq = dynamics.concatenate(
        [
            dynamics.ActivationSequence.single(np.array([1, 1, 0]), 2.0),
            dynamics.ActivationSequence.single(np.array([0, 0, 0]), 1.0),
        ],
        n=3,
    )
    traj = dynamics.simulate(state, seq, params=params)
    assert dynamics.path_length(traj) == pytest.approx(4.0)
    assert dynamics.sequence_path_length(seq) == pytest.approx(4.0)
    assert dynamics.execution_time(seq, params=params) == pytest.approx(1.5)


def test_empty_sequence():
    params = dynamics.SwarmParams(n=2)
    state = dynamics.make_state([[0.0, 0.0], [1.0, 1.0]])
    traj = dynamics.simulate(state, dynamics.ActivationSequence.empty(2), params=params)
    assert traj.num_samples == 1
    assert dynamics.path_length(traj) == 0.0


def test_from_steps_validates():
    with pytest.raises(InvalidArgumentError):
        dynamics.ActivationSequence.from_steps([dynamics.ControlStep(np.array([1, 2]), 1.0)], n=2)
    with pytest.raises(InvalidArgumentError):
        dynamics.ActivationSequence.from_steps([dynamics.ControlStep(np.array([1, 0]), -1.0)], n=2)
    with pytest.raises(InvalidArgumentError):
        dynamics.ActivationSequence.from_steps([dynamics.ControlStep(np.array([1]), 1.0)], n=2)


def test_invalid_parameters_and_states():
    with pytest.raises(InvalidArgumentError):
        dynamics.SwarmParams(n=0)
    with pytest.raises(InvalidArgumentError):
        dynamics.SwarmParams(n=2, r=-1.0)
    with pytest.raises(InvalidArgumentError):
        dynamics.SwarmParams(n=2, r_overrides=(1.0,))
    with pytest.raises(InvalidArgumentError):
        dynamics.make_state([[0.0, 0.0]], [0.0, 1.0])
    with pytest.raises(InvalidArgumentError):
        dynamics.make_state([[np.nan, 0.0]])


def test_simulate_rejects_mismatched_sizes():
    params = dynamics.SwarmParams(n=2)
    state = dynamics.make_state(np.zeros((3, 2)))
    with pytest.raises(InvalidArgumentError):
        dynamics.simulate(state, dynamics.ActivationSequence.empty(2), params=params)

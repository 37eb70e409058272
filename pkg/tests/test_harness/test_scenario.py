"""Tests for scenario, state and sequence files."""

import json

import numpy as np
import pytest
import pytest_cases

from groupswarm import dynamics
from groupswarm.allocation import allocate_groups
from groupswarm.errors import InvalidArgumentError, ScenarioParseError, ScenarioValidationError
from groupswarm.harness import scenario

MINIMAL = {
    "n": 2,
    "starts": {"positions": [[1.0, 1.0], [1.0, 4.0]]},
    "goals": [[8.0, 1.0], [8.0, 4.0]],
}


def _text(**changes):
    document = {**MINIMAL, **changes}
    return json.dumps(document, indent=2)


def test_bundled_scenarios():
    ec1 = scenario.load_bundled("ec1")
    assert ec1.n == 6
    assert ec1.goal_radius == 2.0
    assert ec1.config.planner == "rrt-rot"
    assert ec1.env.obstacles == ()
    obstacles = scenario.load_bundled("obstacles")
    assert len(obstacles.env.obstacles) == 2
    assert obstacles.config.subgroups == ((4, 5), (1, 3), (2, 6))
    with pytest.raises(InvalidArgumentError):
        scenario.bundled_path("ec2")


def test_defaults_of_a_minimal_scenario():
    scn = scenario.parse_scenario(_text())
    assert scn.params.r == 1.0
    assert np.allclose(scn.starts.orientations, 0.0)
    assert scn.alloc.m == 3
    assert scn.env.bounds == (0.0, 0.0, 20.0, 20.0)


def test_scenario_round_trip(tmp_path):
    scn = scenario.parse_scenario(
        _text(
            environment={"obstacles": [{"center": [5.0, 10.0], "radius": 2.0}]},
            planner={"planner": "subgroup-parallel", "subgroups": [[1], [2]], "max_nodes": 10},
            seed=7,
        )
    )
    path = tmp_path / "scenario.json"
    scenario.save_scenario(scn, str(path))
    loaded = scenario.load_scenario(str(path))
    assert loaded.config == scn.config
    assert loaded.env == scn.env
    assert loaded.seed == 7
    assert np.array_equal(loaded.goals, scn.goals)
    assert np.array_equal(loaded.alloc.matrix, scn.alloc.matrix)


def case_malformed_json():
    return '{"n": 2,\n "starts": }', 2, ""


def case_missing_key():
    return json.dumps({"n": 2, "goals": []}), None, "starts"


def case_unknown_key():
    return _text(colour="red"), None, "colour"


def case_unknown_planner():
    return _text(planner={"planner": "astar"}), None, "planner.planner"


def case_negative_radius():
    return _text(goal_radius=-1.0, r=-2.0), None, "r"


@pytest_cases.parametrize_with_cases("text, line, key", cases=".")
def test_parse_errors(text, line, key):
    with pytest.raises(ScenarioParseError) as err:
        scenario.parse_scenario(text)
    assert err.value.line == line
    assert err.value.key == key


@pytest.mark.parametrize(
    "changes",
    [
        {"environment": {"obstacles": [{"center": [8.0, 4.0], "radius": 1.0}]}},
        {"goals": [[8.0, 1.0]]},
        {"r_overrides": [1.0]},
        {"goal_radius": 0.0},
        {"alloc": [[1, 0], [1, 1]]},
        {"planner": {"subgroups": [[1]]}},
    ],
)
def test_validation_errors(changes):
    with pytest.raises(ScenarioValidationError):
        scenario.parse_scenario(_text(**changes))


def test_state_round_trip(tmp_path):
    state = dynamics.make_state([[1.0, 2.0], [3.0, 4.0]], [0.5, 6.0])
    path = tmp_path / "state.json"
    scenario.save_state(state, str(path))
    loaded = scenario.load_state(str(path))
    assert np.array_equal(loaded.positions, state.positions)
    assert np.array_equal(loaded.orientations, state.orientations)
    with pytest.raises(ScenarioValidationError):
        scenario.parse_state('{"positions": [[0.0, 0.0]], "orientations": [0.0, 1.0]}')


def test_sequence_files(tmp_path):
    alloc = allocate_groups(6)
    seq = dynamics.ActivationSequence(
        np.stack([alloc.activation(1), alloc.activation(4), np.array([1, 1, 0, 0, 0, 0])]),
        np.array([0.1, np.pi, 2.0]),
    )
    path = tmp_path / "sequence.txt"
    scenario.save_sequence(seq, str(path), alloc=alloc)
    assert path.read_text().splitlines()[1] == f"4 {np.pi!r}"
    loaded = scenario.load_sequence(str(path), n=6, alloc=alloc)
    assert np.array_equal(loaded.activations, seq.activations)
    assert np.array_equal(loaded.arcs, seq.arcs)


def test_sequence_comments_and_bitstrings():
    text = "# header\n\n000111 1.5  # first\n2 0.25\n"
    seq = scenario.parse_sequence(text, n=6, alloc=allocate_groups(6))
    assert seq.activations.tolist() == [[0, 0, 0, 1, 1, 1], [0, 1, 1, 0, 0, 1]]
    assert seq.arcs.tolist() == [1.5, 0.25]
    assert scenario.parse_sequence("# nothing\n", n=6).num_steps == 0


@pytest.mark.parametrize(
    "text, line",
    [
        ("1 0.5\n2 x\n", 2),
        ("1 -0.5\n", 1),
        ("\n\n9 0.5\n", 3),
        ("1 0.5 extra\n", 1),
        ("1 inf\n", 1),
        ("0101 0.5\n", 1),
    ],
)
def test_sequence_errors_carry_the_line(text, line):
    with pytest.raises(ScenarioParseError) as err:
        scenario.parse_sequence(text, n=6, alloc=allocate_groups(6))
    assert err.value.line == line


def test_group_indices_need_an_allocation():
    with pytest.raises(ScenarioParseError):
        scenario.parse_sequence("1 0.5\n", n=6)

"""Tests for bracket expressions and compiled primitives."""

import jax.numpy as jnp
import numpy as np
import pytest
import pytest_cases

from groupswarm import brackets, dynamics
from groupswarm.allocation import allocate_groups
from groupswarm.errors import (
    InvalidArgumentError,
    NoPrimitiveError,
    ScenarioParseError,
    ScenarioValidationError,
)
from groupswarm.utils import angles

SIX_ROBOT_BRACKETS = [
    ("[h2,g1]", (4, 5)),
    ("[h3,g1]", (4, 6)),
    ("[h1,g2]", (2, 3)),
    ("[h3,g2]", (2, 6)),
    ("[h1,g3]", (1, 3)),
    ("[h2,g3]", (1, 5)),
    ("[h1+h2-f4,g3]", (1,)),
    ("[h1+h3-f4,g2]", (2,)),
    ("[f4-h3,g2]", (3,)),
    ("[h2+h3-f4,g1]", (4,)),
    ("[f4-h3,g1]", (5,)),
    ("[f4-h2,g1]", (6,)),
]


@pytest_cases.parametrize("expr, robots", SIX_ROBOT_BRACKETS)
def case_six_robots(expr, robots):
    return expr, robots


@pytest_cases.parametrize_with_cases("expr, robots", cases=".")
def test_affected_robots(expr, robots):
    alloc = allocate_groups(6)
    assert brackets.affected_robots(brackets.parse(expr), alloc=alloc) == frozenset(robots)


@pytest_cases.parametrize_with_cases("expr, robots", cases=".")
def test_compile_primitive_finds_lowest_order(expr, robots):
    prim = brackets.compile_primitive(robots, alloc=allocate_groups(6))
    assert str(prim.expr) == expr
    assert prim.order == (2 if len(robots) == 2 else 3)
    assert prim.affected == frozenset(robots)


@pytest_cases.parametrize_with_cases("expr, robots", cases=".")
def test_primitive_moves_exactly_its_robots(expr, robots):
    alloc = allocate_groups(6)
    params = dynamics.SwarmParams(n=6)
    rng = np.random.default_rng(len(expr))
    state = dynamics.make_state(rng.uniform(-5, 5, size=(6, 2)), rng.uniform(0, 6, size=6))
    prim = brackets.compile_primitive(robots, alloc=alloc, params=params)
    for d in (0.4, -0.25):
        final = dynamics.final_state(state, prim.compile(d), params=params)
        heading = jnp.stack([jnp.cos(state.orientations), jnp.sin(state.orientations)], -1)
        moved = np.isin(np.arange(1, 7), robots)
        expected = jnp.where(moved[:, None], state.positions + d * heading, state.positions)
        assert jnp.allclose(final.positions, expected, atol=1e-6)
        assert angles.headings_close(final.orientations, state.orientations, tol=1e-9)


def test_aimed_primitive_moves_along_requested_headings():
    alloc = allocate_groups(6)
    params = dynamics.SwarmParams(n=6)
    state = dynamics.make_state(np.zeros((6, 2)), np.zeros(6))
    prim = brackets.compile_primitive([4, 5], alloc=alloc, params=params)
    seq = prim.compile(0.5, state=state, headings={4: np.pi / 2, 5: np.pi})
    final = dynamics.final_state(state, seq, params=params)
    assert jnp.allclose(final.positions[3], jnp.asarray([0.0, 0.5]), atol=1e-6)
    assert jnp.allclose(final.positions[4], jnp.asarray([-0.5, 0.0]), atol=1e-6)
    assert jnp.allclose(final.positions[jnp.asarray([0, 1, 2, 5])], 0.0, atol=1e-6)
    with pytest.raises(InvalidArgumentError):
        prim.compile(0.5, headings={4: 0.0})


def test_whole_group_is_a_raw_translation():
    prim = brackets.compile_primitive([4, 5, 6], alloc=allocate_groups(6))
    assert str(prim.expr) == "g1"
    assert prim.order == 1
    assert prim.gain == 1


def test_no_primitive_lists_nearest_subgroups():
    with pytest.raises(NoPrimitiveError) as err:
        brackets.compile_primitive([1, 2], alloc=allocate_groups(6))
    assert err.value.subgroup == (1, 2)
    assert err.value.nearest
    assert all(len(set(s) & {1, 2}) == 1 for s in err.value.nearest)


def test_compile_primitive_rejects_bad_subgroups():
    alloc = allocate_groups(6)
    with pytest.raises(InvalidArgumentError):
        brackets.compile_primitive([], alloc=alloc)
    with pytest.raises(InvalidArgumentError):
        brackets.compile_primitive([7], alloc=alloc)


def test_every_single_robot_is_reachable_for_larger_swarms():
    alloc = allocate_groups(10)
    for k in range(1, 11):
        prim = brackets.compile_primitive([k], alloc=alloc)
        assert prim.affected == {k}


def test_single_brackets_reach_every_robot_of_six():
    alloc = allocate_groups(6)
    for k in range(1, 7):
        assert brackets.compile_primitive([k], alloc=alloc, max_order=3).order <= 3


def test_order_cap_rejects_robots_that_need_nested_brackets():
    alloc = allocate_groups(14)
    prims = {k: brackets.compile_primitive([k], alloc=alloc) for k in range(1, 15)}
    deep = [k for k, prim in prims.items() if prim.order > 3]
    assert deep
    for k in deep:
        assert brackets.depth(prims[k].expr) >= 2
        with pytest.raises(NoPrimitiveError) as err:
            brackets.compile_primitive([k], alloc=alloc, max_order=3)
        assert err.value.subgroup == (k,)
        assert err.value.nearest
    with pytest.raises(InvalidArgumentError):
        brackets.compile_primitive([1], alloc=alloc, max_order=0)


@pytest.mark.parametrize(
    "text", ["", "[h1,", "h1 h2", "[h1,g2]]", "h1-h1", "[h1 g2]", "h1+", "x1", "h1++h2"]
)
def test_parse_rejects_malformed_expressions(text):
    with pytest.raises(InvalidArgumentError):
        brackets.parse(text)


def test_parse_accepts_coefficients_and_whitespace():
    expr = brackets.parse(" [ 2h1 - f4 , [h3, g2] ] ")
    assert str(expr) == "[2h1-f4,[h3,g2]]"
    assert brackets.depth(expr) == 2
    assert brackets.order(expr) == 4


def test_check_rejects_missing_fields():
    with pytest.raises(InvalidArgumentError):
        brackets.check(brackets.parse("[h4,g1]"), m=4)
    with pytest.raises(InvalidArgumentError):
        brackets.check(brackets.parse("[f5,g1]"), m=4)


def test_realizability():
    alloc = allocate_groups(6)
    assert brackets.is_realizable(brackets.parse("[h2,g1]"), alloc=alloc)
    assert not brackets.is_realizable(brackets.parse("[2h2,g1]"), alloc=alloc)
    assert not brackets.is_realizable(brackets.parse("[h1,h2]"), alloc=alloc)
    assert not brackets.is_realizable(brackets.parse("f1"), alloc=alloc)
    with pytest.raises(InvalidArgumentError):
        brackets.realize(brackets.parse("[g1,g2]"), leg=1.0, alloc=alloc, params=dynamics.SwarmParams(n=6))


def test_bracket_sides_are_antisymmetric():
    alloc = allocate_groups(6)
    params = dynamics.SwarmParams(n=6)
    state = dynamics.make_state(np.zeros((6, 2)), np.zeros(6))
    forward = brackets.realize(brackets.parse("[h2,g1]"), leg=0.25, alloc=alloc, params=params)
    swapped = brackets.realize(brackets.parse("[g1,h2]"), leg=0.25, alloc=alloc, params=params)
    a = dynamics.final_state(state, forward, params=params)
    b = dynamics.final_state(state, swapped, params=params)
    assert jnp.allclose(a.positions, -b.positions, atol=1e-6)


def test_search_starts_with_raw_translations():
    alloc = allocate_groups(6)
    first = [str(e) for _, e in zip(range(4), brackets.candidates(alloc))]
    assert first == ["g1", "g2", "g3", "[h2,g1]"]


def test_library_round_trip(tmp_path):
    alloc = allocate_groups(6)
    prims = [brackets.compile_primitive(s, alloc=alloc) for s in ([4, 5], [2], [4, 5, 6])]
    path = tmp_path / "library.json"
    brackets.save_library(prims, str(path))
    loaded = brackets.load_library(str(path), alloc=alloc)
    assert [str(p.expr) for p in loaded] == ["[h2,g1]", "[h1+h3-f4,g2]", "g1"]
    assert [p.affected for p in loaded] == [p.affected for p in prims]


def test_library_is_checked_against_the_allocation(tmp_path):
    path = tmp_path / "library.json"
    brackets.save_library([brackets.compile_primitive([4, 5], alloc=allocate_groups(6))], str(path))
    with pytest.raises(ScenarioValidationError):
        brackets.load_library(str(path), alloc=allocate_groups(7))

    path.write_text('{"n": 6, "primitives": [{"subgroup": [4, 6], "expr": "[h2,g1]", "order": 2}]}')
    with pytest.raises(ScenarioValidationError):
        brackets.load_library(str(path), alloc=allocate_groups(6))

    path.write_text('{"n": 6,\n "primitives": [}')
    with pytest.raises(ScenarioParseError) as err:
        brackets.load_library(str(path), alloc=allocate_groups(6))
    assert err.value.line == 2

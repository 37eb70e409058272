"""Reading and writing scenarios, swarm states and activation sequences."""

import importlib.resources
import logging
from typing import List, Optional, Tuple

import numpy as np
import pydantic

from groupswarm import defaults
from groupswarm.allocation import GroupAllocation
from groupswarm.dynamics import ActivationSequence, SwarmParams, SwarmState, make_state
from groupswarm.errors import (
    InvalidArgumentError,
    ScenarioParseError,
    ScenarioValidationError,
    schema_error,
)
from groupswarm.planning.environment import (
    PLANNERS,
    Environment,
    Obstacle,
    PlannerConfig,
    Scenario,
)

logger = logging.getLogger(__name__)

BUNDLED = ("ec1", "obstacles", "ec1_bench", "obstacles_bench")
"""Scenario and batch files shipped with the package."""


class _Strict(pydantic.BaseModel):
    model_config = pydantic.ConfigDict(extra="forbid")


class ObstacleModel(_Strict):
    center: Tuple[float, float]
    radius: float = pydantic.Field(gt=0.0)


class EnvironmentModel(_Strict):
    bounds: Tuple[float, float, float, float] = defaults.BOUNDS
    obstacles: List[ObstacleModel] = []
    robot_radius: float = pydantic.Field(default=0.0, ge=0.0)
    min_separation: Optional[float] = pydantic.Field(default=None, ge=0.0)


class StateModel(_Strict):
    positions: List[Tuple[float, float]]
    orientations: Optional[List[float]] = None


class PlannerModel(_Strict):
    planner: str = "rrt-rot"
    max_nodes: int = pydantic.Field(default=defaults.MAX_NODES, ge=1)
    max_time: float = pydantic.Field(default=defaults.MAX_TIME, gt=0.0)
    d_max: float = pydantic.Field(default=defaults.D_MAX, gt=0.0)
    goal_bias: float = pydantic.Field(default=defaults.GOAL_BIAS, ge=0.0, le=1.0)
    candidates: int = pydantic.Field(default=defaults.EXTENSION_CANDIDATES, ge=1)
    resolution: float = pydantic.Field(default=defaults.RESOLUTION, gt=0.0)
    eps: float = pydantic.Field(default=defaults.EPSILON, gt=0.0)
    steps: int = pydantic.Field(default=defaults.NUMOPT_STEPS, ge=1)
    restarts: int = pydantic.Field(default=defaults.NUMOPT_RESTARTS, ge=1)
    tol: float = pydantic.Field(default=defaults.NUMOPT_TOL, gt=0.0)
    maxiter: int = pydantic.Field(default=defaults.NUMOPT_MAXITER, ge=1)
    subgroups: List[List[int]] = []

    @pydantic.field_validator("planner")
    @classmethod
    def _known_planner(cls, value: str) -> str:
        if value not in PLANNERS:
            raise ValueError(f"unknown planner {value!r}, expected one of {PLANNERS}")
        return value


class ScenarioModel(_Strict):
    n: int = pydantic.Field(ge=1)
    r: float = pydantic.Field(default=defaults.TURNING_RADIUS, gt=0.0)
    r_overrides: Optional[List[float]] = None
    u_nominal: float = pydantic.Field(default=defaults.U_NOMINAL, gt=0.0)
    starts: StateModel
    goals: List[Tuple[float, float]]
    environment: EnvironmentModel = EnvironmentModel()
    goal_radius: float = defaults.GOAL_RADIUS
    seed: int = 0
    alloc: Optional[List[List[int]]] = None
    planner: PlannerModel = PlannerModel()


def parse_scenario(text: str) -> Scenario:
    """Build a validated scenario from JSON text.

    Raises
    ------
    ScenarioParseError
        If the text does not match the schema.
    ScenarioValidationError
        If the scenario violates an invariant, e.g. a goal inside an obstacle.
    """
    try:
        model = ScenarioModel.model_validate_json(text)
    except pydantic.ValidationError as err:
        raise schema_error(err, text) from err
    try:
        return _to_scenario(model)
    except InvalidArgumentError as err:
        raise ScenarioValidationError(str(err)) from err


def load_scenario(path: str) -> Scenario:
    """Read a scenario file. The allocation is generated from ``n`` when omitted."""
    with open(path, encoding="utf-8") as f:
        text = f.read()
    scn = parse_scenario(text)
    logger.debug("Loaded %d-robot scenario from %s.", scn.n, path)
    return scn


def bundled_path(name: str) -> str:
    """Path of a file shipped in ``groupswarm/harness/scenarios``."""
    if name not in BUNDLED:
        raise InvalidArgumentError(f"Unknown bundled file {name!r}; expected one of {BUNDLED}.")
    resource = importlib.resources.files("groupswarm.harness") / "scenarios" / f"{name}.json"
    return str(resource)


def load_bundled(name: str) -> Scenario:
    """Load one of the bundled scenarios, e.g. ``"ec1"``."""
    return load_scenario(bundled_path(name))


def _to_scenario(model: ScenarioModel) -> Scenario:
    params = SwarmParams(
        n=model.n,
        r=model.r,
        r_overrides=None if model.r_overrides is None else tuple(model.r_overrides),
        u_nominal=model.u_nominal,
    )
    env = Environment(
        bounds=model.environment.bounds,
        obstacles=tuple(Obstacle(o.center, o.radius) for o in model.environment.obstacles),
        robot_radius=model.environment.robot_radius,
        min_separation=model.environment.min_separation,
    )
    planner = model.planner.model_dump()
    planner["subgroups"] = tuple(tuple(s) for s in planner["subgroups"])
    alloc = None
    if model.alloc is not None:
        alloc = GroupAllocation(np.asarray(model.alloc, dtype=np.int8))
    return Scenario(
        params=params,
        starts=_to_state(model.starts),
        goals=np.asarray(model.goals, dtype=float),
        env=env,
        goal_radius=model.goal_radius,
        seed=model.seed,
        config=PlannerConfig(**planner),
        alloc=alloc,
    )


def scenario_to_json(scn: Scenario) -> str:
    """JSON text of a scenario, readable by :func:`parse_scenario`."""
    model = ScenarioModel(
        n=scn.n,
        r=scn.params.r,
        r_overrides=None if scn.params.r_overrides is None else list(scn.params.r_overrides),
        u_nominal=scn.params.u_nominal,
        starts=_state_model(scn.starts),
        goals=[tuple(g) for g in scn.goals.tolist()],
        environment=EnvironmentModel(
            bounds=scn.env.bounds,
            obstacles=[ObstacleModel(center=o.center, radius=o.radius) for o in scn.env.obstacles],
            robot_radius=scn.env.robot_radius,
            min_separation=scn.env.min_separation,
        ),
        goal_radius=scn.goal_radius,
        seed=scn.seed,
        alloc=np.asarray(scn.alloc.matrix).tolist(),
        planner=PlannerModel(**{**scn.config._asdict(), "subgroups": scn.config.subgroups}),
    )
    return model.model_dump_json(indent=2) + "\n"


def save_scenario(scn: Scenario, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(scenario_to_json(scn))


def _to_state(model: StateModel) -> SwarmState:
    return make_state(model.positions, model.orientations)


def _state_model(state: SwarmState) -> StateModel:
    return StateModel(
        positions=[tuple(p) for p in np.asarray(state.positions).tolist()],
        orientations=np.asarray(state.orientations).tolist(),
    )


def state_to_json(state: SwarmState) -> str:
    """JSON text with ``positions`` and ``orientations`` keys."""
    return _state_model(state).model_dump_json(indent=2) + "\n"


def parse_state(text: str) -> SwarmState:
    try:
        model = StateModel.model_validate_json(text)
    except pydantic.ValidationError as err:
        raise schema_error(err, text) from err
    try:
        return _to_state(model)
    except InvalidArgumentError as err:
        raise ScenarioValidationError(str(err)) from err


def save_state(state: SwarmState, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(state_to_json(state))


def load_state(path: str) -> SwarmState:
    with open(path, encoding="utf-8") as f:
        return parse_state(f.read())


def format_sequence(seq: ActivationSequence, *, alloc: Optional[GroupAllocation] = None) -> str:
    """One line ``<group-or-bitstring> <arc>`` per step.

    Activations that match a group of ``alloc`` are written as the group
    index unless the index could be read as a bitstring.

    Examples
    --------
    >>> from groupswarm.allocation import allocate_groups
    >>> seq = ActivationSequence(np.array([[0, 0, 0, 1, 1, 1], [1, 1, 0, 0, 0, 0]]), np.array([0.5, 2.0]))
    >>> print(format_sequence(seq, alloc=allocate_groups(6)), end="")
    1 0.5
    110000 2.0
    """
    rows = {}
    if alloc is not None:
        rows = {bytes(alloc.activation(g).tolist()): g for g in range(1, alloc.m + 1)}
    lines = []
    for activation, arc in zip(seq.activations, seq.arcs):
        bits = "".join(str(int(a)) for a in activation)
        group = rows.get(bytes(np.asarray(activation, dtype=np.int8).tolist()))
        token = bits
        if group is not None and not _looks_like_bits(str(group), seq.n):
            token = str(group)
        lines.append(f"{token} {float(arc)!r}")
    return "".join(line + "\n" for line in lines)


def parse_sequence(
    text: str, *, n: int, alloc: Optional[GroupAllocation] = None
) -> ActivationSequence:
    """Inverse of :func:`format_sequence`. Blank lines and ``#`` comments are skipped.

    Raises
    ------
    ScenarioParseError
        With the offending line number.
    """
    activations, arcs = [], []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ScenarioParseError(f"Expected '<group> <arc>', got {raw!r}.", line=number)
        token, arc_text = parts
        try:
            arc = float(arc_text)
        except ValueError:
            raise ScenarioParseError(f"Arc {arc_text!r} is not a number.", line=number) from None
        if not (np.isfinite(arc) and arc >= 0.0):
            raise ScenarioParseError(f"Arc must be finite and nonnegative, got {arc}.", line=number)
        if _looks_like_bits(token, n):
            activation = np.asarray([int(c) for c in token], dtype=np.int8)
        elif token.isdigit() and alloc is not None and 1 <= int(token) <= alloc.m:
            activation = alloc.activation(int(token))
        else:
            raise ScenarioParseError(f"Unknown group or activation {token!r}.", line=number)
        activations.append(activation)
        arcs.append(arc)
    if not arcs:
        return ActivationSequence.empty(n)
    return ActivationSequence(np.stack(activations).astype(np.int8), np.asarray(arcs, dtype=float))


def _looks_like_bits(token: str, n: int) -> bool:
    return len(token) == n and set(token) <= {"0", "1"}


def save_sequence(
    seq: ActivationSequence, path: str, *, alloc: Optional[GroupAllocation] = None
) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(format_sequence(seq, alloc=alloc))


def load_sequence(
    path: str, *, n: int, alloc: Optional[GroupAllocation] = None
) -> ActivationSequence:
    with open(path, encoding="utf-8") as f:
        return parse_sequence(f.read(), n=n, alloc=alloc)

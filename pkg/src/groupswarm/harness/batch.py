"""Seeded batch experiments and metric tables."""

import csv
import logging
import os
import time
from typing import Any, Callable, Dict, List, NamedTuple, Sequence, Union

import numpy as np
import pydantic

from groupswarm._toplevel_api import plan
from groupswarm.errors import InvalidArgumentError, ScenarioValidationError, schema_error
from groupswarm.harness import plot, scenario
from groupswarm.planning import PLANNERS, PlanResult, Scenario, Status
from groupswarm.typing import Clock

logger = logging.getLogger(__name__)

COLUMNS = (
    "planner",
    "seed",
    "status",
    "runtime_s",
    "rrt_nodes",
    "path_length",
    "execution_time",
)
"""Column order of ``metrics.csv``."""


class MetricRow(NamedTuple):
    """One planner run, or the mean over all runs of a planner (``seed == "mean"``)."""

    planner: str
    seed: Union[int, str]
    status: str
    runtime_s: float
    rrt_nodes: float
    path_length: float
    execution_time: float


class BatchSpec(NamedTuple):
    """Planners times seeds over one scenario template."""

    scenario: Scenario
    planners: Sequence[str]
    seeds: Sequence[int]
    out: str
    repeat: int = 1


class CountingClock:
    """Clock that advances by a fixed tick on every reading.

    Makes runtimes, and therefore metric tables, reproducible.

    Examples
    --------
    >>> clock = CountingClock(tick=0.5)
    >>> clock(), clock(), clock()
    (0.0, 0.5, 1.0)
    """

    def __init__(self, tick: float = 1e-3):
        self.tick = tick
        self.count = 0

    def __call__(self) -> float:
        value = self.count * self.tick
        self.count += 1
        return value


class _BatchModel(pydantic.BaseModel):
    model_config = pydantic.ConfigDict(extra="forbid")

    scenario: str
    planners: List[str] = pydantic.Field(min_length=1)
    seeds: List[int] = pydantic.Field(min_length=1)
    repeat: int = pydantic.Field(default=1, ge=1)
    config: Dict[str, Any] = {}


def load_batch(path: str, *, out: str) -> BatchSpec:
    """Read a batch file.

    ``scenario`` is a path relative to the batch file or the name of a bundled
    scenario. ``config`` overrides planner knobs of the scenario.
    """
    with open(path, encoding="utf-8") as f:
        text = f.read()
    try:
        model = _BatchModel.model_validate_json(text)
    except pydantic.ValidationError as err:
        raise schema_error(err, text) from err
    candidate = os.path.join(os.path.dirname(os.path.abspath(path)), model.scenario)
    if os.path.exists(candidate):
        scn = scenario.load_scenario(candidate)
    else:
        scn = scenario.load_bundled(os.path.splitext(model.scenario)[0])
    if model.config:
        fields = set(scn.config._fields)
        unknown = sorted(set(model.config) - fields)
        if unknown:
            raise ScenarioValidationError(f"Unknown planner config keys {unknown}.")
        scn = scn.replace(config=scn.config._replace(**model.config))
    spec = BatchSpec(scn, tuple(model.planners), tuple(model.seeds), out, model.repeat)
    _check_spec(spec)
    return spec


def _check_spec(spec: BatchSpec) -> None:
    if not spec.planners or not spec.seeds:
        raise InvalidArgumentError("A batch needs at least one planner and one seed.")
    unknown = [p for p in spec.planners if p not in PLANNERS]
    if unknown:
        raise InvalidArgumentError(f"Unknown planners {unknown}; expected some of {PLANNERS}.")
    if spec.repeat < 1:
        raise InvalidArgumentError(f"repeat must be >= 1, got {spec.repeat}.")


def run_batch(
    spec: BatchSpec,
    *,
    clock_factory: Callable[[], Clock] = lambda: time.perf_counter,
    plots: bool = True,
) -> List[MetricRow]:
    """Run every planner on every seed and write the artifacts.

    Every run writes ``sequence.txt``, ``trajectory.csv`` and (if ``plots``)
    ``plot.svg`` into ``<out>/<planner>/seed-<seed>/``. ``metrics.csv`` in
    ``out`` lists every run followed by one mean row per planner, whose status
    reads ``solved:<k>/<N>``. A run that raises is recorded as infeasible.

    Parameters
    ----------
    spec
        Batch to run.
    clock_factory
        Fresh clock per run. Runtimes are the mean over ``spec.repeat`` runs.
    plots
        Whether to draw every run.

    Returns
    -------
    :
        Run rows followed by the mean rows.
    """
    _check_spec(spec)
    os.makedirs(spec.out, exist_ok=True)
    rows: List[MetricRow] = []
    for planner in spec.planners:
        planner_rows = []
        for seed in spec.seeds:
            row = _run_cell(spec, planner, seed, clock_factory=clock_factory, plots=plots)
            logger.info("%s seed %s: %s", planner, seed, row.status)
            planner_rows.append(row)
        rows.extend(planner_rows)
    for planner in spec.planners:
        rows.append(aggregate([r for r in rows if r.planner == planner and r.seed != "mean"]))
    write_metrics(rows, os.path.join(spec.out, "metrics.csv"))
    return rows


def _run_cell(
    spec: BatchSpec,
    planner: str,
    seed: int,
    *,
    clock_factory: Callable[[], Clock],
    plots: bool,
) -> MetricRow:
    scn = spec.scenario.replace(
        seed=int(seed), config=spec.scenario.config._replace(planner=planner)
    )
    directory = os.path.join(spec.out, planner, f"seed-{seed}")
    os.makedirs(directory, exist_ok=True)
    try:
        runtimes = []
        for _ in range(spec.repeat):
            result = plan(scn, planner=planner, clock=clock_factory())
            runtimes.append(result.metrics.runtime_s)
    except Exception as err:  # pylint: disable=broad-except
        logger.warning("%s seed %s failed: %s", planner, seed, err)
        with open(os.path.join(directory, "error.txt"), "w", encoding="utf-8") as f:
            f.write(f"{type(err).__name__}: {err}\n")
        return MetricRow(planner, int(seed), Status.INFEASIBLE.value, 0.0, 0, 0.0, 0.0)
    _write_artifacts(scn, result, directory, plots=plots)
    metrics = result.metrics
    return MetricRow(
        planner=planner,
        seed=int(seed),
        status=result.status.value,
        runtime_s=float(np.mean(runtimes)),
        rrt_nodes=metrics.rrt_nodes,
        path_length=metrics.path_length,
        execution_time=metrics.execution_time,
    )


def _write_artifacts(scn: Scenario, result: PlanResult, directory: str, *, plots: bool) -> None:
    scenario.save_sequence(result.seq, os.path.join(directory, "sequence.txt"), alloc=scn.alloc)
    write_trajectory(result, os.path.join(directory, "trajectory.csv"))
    if plots:
        plot.emit_plot(
            result.traj,
            scn.env,
            os.path.join(directory, "plot.svg"),
            goals=scn.goals,
            title=f"{scn.config.planner} ({result.status.value})",
        )


def write_trajectory(result: PlanResult, path: str) -> None:
    """One line per sample and robot: ``sample, robot, x, y, theta``."""
    positions = np.asarray(result.traj.positions)
    orientations = np.asarray(result.traj.orientations)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(("sample", "robot", "x", "y", "theta"))
        for i in range(positions.shape[0]):
            for j in range(positions.shape[1]):
                x, y = (repr(float(c)) for c in positions[i, j])
                writer.writerow((i, j + 1, x, y, repr(float(orientations[i, j]))))


def aggregate(rows: Sequence[MetricRow]) -> MetricRow:
    """Mean of every numeric column over all rows of one planner.

    Examples
    --------
    >>> rows = [MetricRow("rrt", 0, "solved", 1.0, 10, 2.0, 3.0),
    ...         MetricRow("rrt", 1, "timeout", 3.0, 30, 4.0, 5.0)]
    >>> aggregate(rows)
    MetricRow(planner='rrt', seed='mean', status='solved:1/2', runtime_s=2.0, rrt_nodes=20.0, path_length=3.0, execution_time=4.0)
    """
    if not rows:
        raise InvalidArgumentError("Cannot aggregate an empty set of rows.")
    solved = sum(r.status == Status.SOLVED.value for r in rows)

    def mean(column: str) -> float:
        return float(np.mean([getattr(r, column) for r in rows]))

    return MetricRow(
        planner=rows[0].planner,
        seed="mean",
        status=f"solved:{solved}/{len(rows)}",
        runtime_s=mean("runtime_s"),
        rrt_nodes=mean("rrt_nodes"),
        path_length=mean("path_length"),
        execution_time=mean("execution_time"),
    )


def write_metrics(rows: Sequence[MetricRow], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(COLUMNS)
        for row in rows:
            writer.writerow([_cell(value) for value in row])


def read_metrics(path: str) -> List[MetricRow]:
    """Rows of a ``metrics.csv`` file."""
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        rows = []
        for record in reader:
            seed: Union[int, str] = record["seed"]
            if seed != "mean":
                seed = int(seed)
            rows.append(
                MetricRow(
                    planner=record["planner"],
                    seed=seed,
                    status=record["status"],
                    runtime_s=float(record["runtime_s"]),
                    rrt_nodes=float(record["rrt_nodes"]),
                    path_length=float(record["path_length"]),
                    execution_time=float(record["execution_time"]),
                )
            )
    return rows


def _cell(value: Any) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)

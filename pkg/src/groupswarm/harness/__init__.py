"""Scenario files, batch experiments, plots and the command line."""

from .batch import BatchSpec, MetricRow, load_batch, run_batch
from .plot import emit_plot
from .scenario import (
    load_bundled,
    load_scenario,
    load_sequence,
    load_state,
    save_scenario,
    save_sequence,
    save_state,
)

__all__ = [
    "BatchSpec",
    "MetricRow",
    "load_batch",
    "run_batch",
    "emit_plot",
    "load_scenario",
    "load_bundled",
    "save_scenario",
    "load_sequence",
    "save_sequence",
    "load_state",
    "save_state",
]

"""Group-based global control and motion planning for swarms of nonholonomic robots."""

import jax

jax.config.update("jax_enable_x64", True)

# pylint: disable=wrong-import-position
from ._toplevel_api import Verification, plan, verify
from ._version import version as __version__
from .allocation import GroupAllocation, allocate_groups, min_groups
from .dynamics import (
    ActivationSequence,
    ControlStep,
    SwarmParams,
    SwarmState,
    Trajectory,
    make_state,
    simulate,
    step,
)
from .planning import Environment, PlannerConfig, PlanResult, Scenario, Status

__all__ = [
    "plan",
    "verify",
    "Verification",
    "GroupAllocation",
    "allocate_groups",
    "min_groups",
    "SwarmParams",
    "SwarmState",
    "ControlStep",
    "ActivationSequence",
    "Trajectory",
    "make_state",
    "step",
    "simulate",
    "Environment",
    "Scenario",
    "PlannerConfig",
    "PlanResult",
    "Status",
]

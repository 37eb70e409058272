"""Motion planners over the primitive layer."""

from .comparison import ComparisonRow, compare_primitive_implementations
from .environment import (
    PLANNERS,
    Environment,
    Metrics,
    Obstacle,
    PlannerConfig,
    PlanResult,
    Scenario,
    Status,
    collision_check,
    finalize,
)
from .numopt import optimize_primitive, plan_numopt
from .rrt import plan_rrt
from .subgroups import plan_pure_control, plan_subgroup_parallel, plan_subgroup_sequential

__all__ = [
    "PLANNERS",
    "Environment",
    "Obstacle",
    "Scenario",
    "PlannerConfig",
    "PlanResult",
    "Metrics",
    "Status",
    "collision_check",
    "finalize",
    "plan_numopt",
    "plan_rrt",
    "plan_pure_control",
    "plan_subgroup_parallel",
    "plan_subgroup_sequential",
    "optimize_primitive",
    "compare_primitive_implementations",
    "ComparisonRow",
]

"""Default constants."""

import math

ANGLE_TOL = 1e-9
"""Circular-distance tolerance when comparing headings."""

POSITION_TOL = 1e-6
"""Tolerance for robots that are supposed to return to their start."""

RESOLUTION = 0.5
"""Spatial resolution of intra-step trajectory subsamples (length units)."""

U_NOMINAL = 1.0
"""Forward speed used to turn commanded arc length into execution time."""

TURNING_RADIUS = 1.0
"""Common turning radius."""

EPSILON = 0.5
"""Excursion bound of group members during a bounded rotation composite."""

UNBOUNDED = math.inf
"""Excursion bound that compiles every rotation composite in a single application."""

D_MAX = 2.0
"""Largest arc (or primitive displacement) of a single tree extension."""

GOAL_BIAS = 0.1
"""Probability of sampling the goal configuration."""

MAX_NODES = 20_000
"""Node budget per plan."""

MAX_TIME = 300.0
"""Wall-clock budget per plan, in seconds."""

EXTENSION_CANDIDATES = 4
"""Number of candidate controls tried per tree extension."""

GOAL_RADIUS = 2.0
"""Per-robot acceptance radius."""

NUMOPT_STEPS = 35
"""Number of control steps of a numerically optimised schedule."""

NUMOPT_RESTARTS = 10
"""Random schedules tried, the first included, before a plan is declared infeasible."""

NUMOPT_TOL = 1e-3
"""Largest final position residual accepted from the optimiser."""

NUMOPT_MAXITER = 500
"""Iteration limit of a single optimiser run, least-squares evaluations included."""

ICON_SPACING = 1.0
"""Arc spacing of robot icons in trajectory plots."""

OBSTACLE_CENTERS = ((7.0, 13.0), (13.0, 7.0))
"""Obstacle centres of the bundled two-obstacle environment."""

OBSTACLE_RADIUS = 2.0
"""Obstacle radius of the bundled two-obstacle environment."""

BOUNDS = (0.0, 0.0, 20.0, 20.0)
"""Workspace ``(xmin, ymin, xmax, ymax)`` of the bundled environments."""

"""Vector plots of swarm trajectories."""

import logging
from typing import Optional

import matplotlib
import numpy as np
from matplotlib.figure import Figure
from matplotlib.patches import Circle, Rectangle

from groupswarm import defaults
from groupswarm.dynamics import Trajectory
from groupswarm.planning.environment import Environment
from groupswarm.typing import ArrayLike

logger = logging.getLogger(__name__)


def icon_indices(positions: ArrayLike, *, spacing: float = defaults.ICON_SPACING) -> np.ndarray:
    """Samples at which a robot has covered another ``spacing`` of arc length.

    The first sample is always included, so a stationary robot gets one icon.

    Examples
    --------
    >>> icon_indices(np.array([[0.0, 0.0], [0.6, 0.0], [1.2, 0.0], [2.5, 0.0]]))
    array([0, 2, 3])
    >>> icon_indices(np.zeros((4, 2)))
    array([0])
    """
    positions = np.asarray(positions, dtype=float)
    travelled = np.concatenate(
        [[0.0], np.cumsum(np.linalg.norm(np.diff(positions, axis=0), axis=1))]
    )
    laps = np.floor(travelled / spacing + 1e-9)
    return np.flatnonzero(np.concatenate([[True], np.diff(laps) > 0]))


def emit_plot(
    traj: Trajectory,
    env: Environment,
    path: str,
    *,
    goals: Optional[ArrayLike] = None,
    spacing: float = defaults.ICON_SPACING,
    title: str = "",
) -> None:
    """Draw a trajectory into an SVG file.

    Parameters
    ----------
    traj
        Trajectory to draw.
    env
        Workspace frame and obstacles.
    path
        Output file.
    goals
        Goal positions, drawn as red crosses. Defaults to the final positions.
    spacing
        Arc length between two oriented robot icons. Dense icons mark
        inefficient, back-and-forth motion.
    title
        Axes title.
    """
    positions = np.asarray(traj.positions)
    orientations = np.asarray(traj.orientations)
    goals = positions[-1] if goals is None else np.asarray(goals)
    xmin, ymin, xmax, ymax = env.bounds

    fig = Figure(figsize=(6.0, 6.0))
    ax = fig.add_subplot(1, 1, 1)
    ax.add_patch(Rectangle((xmin, ymin), xmax - xmin, ymax - ymin, fill=False, color="black"))
    for o in env.obstacles:
        ax.add_patch(Circle(o.center, o.radius, color="black"))

    for j in range(positions.shape[1]):
        line = ax.plot(positions[:, j, 0], positions[:, j, 1], linewidth=1.0, label=f"{j + 1}")
        icons = icon_indices(positions[:, j], spacing=spacing)
        heading = orientations[icons, j]
        ax.quiver(
            positions[icons, j, 0],
            positions[icons, j, 1],
            np.cos(heading),
            np.sin(heading),
            color=line[0].get_color(),
            angles="xy",
            scale_units="xy",
            scale=2.0,
            width=0.004,
        )
    ax.scatter(
        positions[0, :, 0], positions[0, :, 1], s=60, facecolors="none", edgecolors="green"
    )
    ax.scatter(goals[:, 0], goals[:, 1], s=60, marker="x", color="red")

    margin = 0.05 * max(xmax - xmin, ymax - ymin)
    ax.set_xlim(xmin - margin, xmax + margin)
    ax.set_ylim(ymin - margin, ymax + margin)
    ax.set_aspect("equal")
    ax.legend(loc="upper right", fontsize="small", title="robot")
    if title:
        ax.set_title(title)
    with matplotlib.rc_context({"svg.hashsalt": "groupswarm"}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    logger.debug("Wrote %s.", path)

"""Common types."""
from typing import Any, Callable, Mapping, Sequence, Tuple

ArrayLike = Any
"""Array type. JAX's arrays cannot be assigned a strict type, so we use 'Any'."""

RobotLabel = int
"""Robot label. Robots are numbered ``1, ..., n``."""

GroupLabel = int
"""Group label. Groups are numbered ``1, ..., m``; group ``m`` rotates every robot."""

RotationTargets = Sequence[Tuple[RobotLabel, float]]
"""Pairs ``(robot, radians)`` handed to orientation control."""

HeadingMap = Mapping[RobotLabel, float]
"""Absolute headings per robot."""

Clock = Callable[[], float]
"""Monotonic clock in seconds, e.g. :func:`time.perf_counter`."""

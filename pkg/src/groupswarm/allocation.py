"""Group allocation.

Every robot carries a distinct bit pattern over the groups ``1, ..., m-1``.
Activating a group makes its members translate while every other robot turns
in place. The extra group ``m`` contains no robot: activating it rotates the
whole swarm.
"""

import dataclasses
import itertools
from typing import Tuple

import numpy as np

from groupswarm.errors import InvalidArgumentError


@dataclasses.dataclass(frozen=True, eq=False)
class GroupAllocation:
    """Binary ``(m, n)`` activation matrix.

    Entry ``(i, j)`` equals one iff robot ``j + 1`` belongs to group ``i + 1``.
    The last row is identically zero.
    """

    matrix: np.ndarray

    def __post_init__(self) -> None:
        matrix = np.asarray(self.matrix, dtype=np.int8)
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)
        _check_matrix(matrix)

    @property
    def m(self) -> int:
        """Number of groups, including the all-rotate group."""
        return int(self.matrix.shape[0])

    @property
    def n(self) -> int:
        """Number of robots."""
        return int(self.matrix.shape[1])

    def activation(self, group: int) -> np.ndarray:
        """Activation vector of a group (1-based)."""
        if not 1 <= group <= self.m:
            raise InvalidArgumentError(f"Group {group} is not in 1..{self.m}.")
        return self.matrix[group - 1]

    def members(self, group: int) -> Tuple[int, ...]:
        """Robots (1-based) that translate when ``group`` is active."""
        return tuple(int(j) + 1 for j in np.flatnonzero(self.activation(group)))

    def groups_of(self, robot: int) -> Tuple[int, ...]:
        """Groups (1-based) that contain ``robot``."""
        if not 1 <= robot <= self.n:
            raise InvalidArgumentError(f"Robot {robot} is not in 1..{self.n}.")
        return tuple(int(i) + 1 for i in np.flatnonzero(self.matrix[:, robot - 1]))

    def pattern(self, robot: int) -> str:
        """Membership bits of a robot over groups ``1..m-1``, group 1 first."""
        column = self.matrix[:-1, robot - 1]
        return "".join(str(int(b)) for b in column)


def min_groups(n: int) -> int:
    """Smallest number of groups that gives every robot a distinct allocation.

    Two of the ``2^(m-1)`` patterns over the translating groups are unusable
    (a robot must translate in some group and rotate in some group), and one
    more group rotates everybody.

    Parameters
    ----------
    n
        Number of robots.

    Returns
    -------
    :
        :math:`\\lceil \\log_2(n+2) \\rceil + 1`.

    Examples
    --------
    >>> min_groups(6)
    4
    >>> [min_groups(n) for n in (1, 2, 5, 14, 15)]
    [3, 3, 4, 5, 6]
    """
    if n < 1:
        raise InvalidArgumentError(f"A swarm needs at least one robot, got n={n}.")
    # ceil(log2(n + 2)) without floating point
    return (n + 1).bit_length() + 1


def allocate_groups(n: int) -> GroupAllocation:
    """Deterministic group allocation with :func:`min_groups` groups.

    Robot ``j`` receives the binary pattern ``j`` over groups ``1..m-1``
    (group 1 is the most significant bit). All-zero and all-one patterns are
    never used.

    Examples
    --------
    >>> print(allocate_groups(6).matrix)
    [[0 0 0 1 1 1]
     [0 1 1 0 0 1]
     [1 0 1 0 1 0]
     [0 0 0 0 0 0]]
    """
    m = min_groups(n)
    bits = m - 1
    robots = np.arange(1, n + 1)
    shifts = np.arange(bits - 1, -1, -1)
    matrix = (robots[None, :] >> shifts[:, None]) & 1
    matrix = np.concatenate([matrix, np.zeros((1, n), dtype=matrix.dtype)])
    return GroupAllocation(matrix)


def is_valid_matrix(matrix: np.ndarray) -> bool:
    """Whether a binary matrix satisfies every allocation invariant."""
    try:
        _check_matrix(np.asarray(matrix))
    except InvalidArgumentError:
        return False
    return True


def allocation_exists(n: int, m: int) -> bool:
    """Whether any valid allocation of ``n`` robots to ``m`` groups exists.

    Decided by enumerating the usable membership patterns.
    """
    if m < 2:
        return False
    usable = sum(
        1 for p in itertools.product((0, 1), repeat=m - 1) if 0 < sum(p) < m - 1
    )
    return usable >= n


def _check_matrix(matrix: np.ndarray) -> None:
    if matrix.ndim != 2 or matrix.shape[0] < 2 or matrix.shape[1] < 1:
        raise InvalidArgumentError(
            f"Allocation must be an (m, n) matrix with m >= 2, got {matrix.shape}."
        )
    if not np.isin(matrix, (0, 1)).all():
        raise InvalidArgumentError("Allocation entries must be binary.")
    if matrix[-1].any():
        raise InvalidArgumentError("The last group must not contain any robot.")
    translating = matrix[:-1]
    counts = translating.sum(axis=0)
    if (counts == 0).any():
        robots = tuple(int(j) + 1 for j in np.flatnonzero(counts == 0))
        raise InvalidArgumentError(f"Robots {robots} never translate.")
    if (counts == translating.shape[0]).any():
        robots = tuple(int(j) + 1 for j in np.flatnonzero(counts == translating.shape[0]))
        raise InvalidArgumentError(f"Robots {robots} never rotate.")
    columns = [tuple(c) for c in translating.T]
    if len(set(columns)) != len(columns):
        raise InvalidArgumentError("Robots must have pairwise distinct allocations.")

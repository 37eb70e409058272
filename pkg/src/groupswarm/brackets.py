"""Bracket expressions over the compiled fields and their realisation.

An expression is either a :class:`Combination` (integer combination of field
references) or a :class:`Bracket` of two expressions. Brackets of a rotation
combination ``X`` with a translation expression ``E`` are realised by

    (E, X(pi), reverse(E), X(pi)),

which doubles the displacement of the robots that ``X`` turns around and
cancels it for everybody else.
"""

import itertools
import logging
import re
from typing import (
    Dict,
    FrozenSet,
    Iterator,
    List,
    NamedTuple,
    Optional,
    Sequence,
    Set,
    Tuple,
    Union,
)

import numpy as np
import pydantic

from groupswarm import defaults, primitives
from groupswarm.allocation import GroupAllocation
from groupswarm.dynamics import ActivationSequence, SwarmParams, SwarmState, concatenate
from groupswarm.errors import (
    InvalidArgumentError,
    NoPrimitiveError,
    ScenarioValidationError,
    schema_error,
)
from groupswarm.typing import HeadingMap, RobotLabel

logger = logging.getLogger(__name__)

KINDS = ("f", "g", "h")
"""Raw fields, bilateral translations, bilateral rotations."""


class FieldRef(NamedTuple):
    """Reference to ``f_i``, ``g_i`` or ``h_i``."""

    kind: str
    index: int

    def __str__(self) -> str:
        return f"{self.kind}{self.index}"


class Combination(NamedTuple):
    """Integer combination of fields, e.g. ``h1+h2-f4``."""

    terms: Tuple[Tuple[int, FieldRef], ...]

    def __str__(self) -> str:
        out = ""
        for position, (coef, ref) in enumerate(self.terms):
            sign = "-" if coef < 0 else ("+" if position else "")
            magnitude = "" if abs(coef) == 1 else str(abs(coef))
            out += f"{sign}{magnitude}{ref}"
        return out


class Bracket(NamedTuple):
    """Bracket ``[left, right]``."""

    left: "BracketExpr"
    right: "BracketExpr"

    def __str__(self) -> str:
        return f"[{self.left},{self.right}]"


BracketExpr = Union[Combination, Bracket]


def leaf(kind: str, index: int, coef: int = 1) -> Combination:
    """Single-field combination."""
    return Combination(((coef, FieldRef(kind, index)),))


_TOKEN = re.compile(r"\s*(?:(\[)|(\])|(,)|([+-])|(\d*)([fgh])(\d+))")


def parse(text: str) -> BracketExpr:
    """Parse a bracket expression.

    Examples
    --------
    >>> expr = parse("[h1 + h2 - f4, g3]")
    >>> print(expr)
    [h1+h2-f4,g3]
    >>> print(parse("[f4-h3,[h1,g2]]").right)
    [h1,g2]
    """
    tokens = _tokenize(text)
    expr, position = _parse_expr(tokens, 0, text)
    if position != len(tokens):
        raise InvalidArgumentError(f"Trailing input in bracket expression {text!r}.")
    return expr


def _tokenize(text: str) -> List[Tuple[str, object]]:
    tokens: List[Tuple[str, object]] = []
    position = 0
    stripped = text.rstrip()
    while position < len(stripped):
        match = _TOKEN.match(stripped, position)
        if match is None:
            raise InvalidArgumentError(
                f"Unexpected character {stripped[position:].strip()[:1]!r} in {text!r}."
            )
        open_, close, comma, sign, coef, kind, index = match.groups()
        if open_:
            tokens.append(("[", None))
        elif close:
            tokens.append(("]", None))
        elif comma:
            tokens.append((",", None))
        elif sign:
            tokens.append(("sign", -1 if sign == "-" else 1))
        else:
            tokens.append(("term", (int(coef) if coef else 1, FieldRef(kind, int(index)))))
        position = match.end()
    return tokens


def _parse_expr(tokens, position, text) -> Tuple[BracketExpr, int]:
    if position >= len(tokens):
        raise InvalidArgumentError(f"Unexpected end of bracket expression {text!r}.")
    if tokens[position][0] == "[":
        left, position = _parse_expr(tokens, position + 1, text)
        _expect(tokens, position, ",", text)
        right, position = _parse_expr(tokens, position + 1, text)
        _expect(tokens, position, "]", text)
        return Bracket(left, right), position + 1

    terms: Dict[FieldRef, int] = {}
    sign: Optional[int] = None
    after_term = False
    while position < len(tokens) and tokens[position][0] in ("sign", "term"):
        kind, value = tokens[position]
        if kind == "sign":
            if sign is not None:
                raise InvalidArgumentError(f"Repeated sign in {text!r}.")
            sign = value  # type: ignore[assignment]
        else:
            if after_term and sign is None:
                raise InvalidArgumentError(f"Missing operator in {text!r}.")
            coef, ref = value  # type: ignore[misc]
            terms[ref] = terms.get(ref, 0) + (1 if sign is None else sign) * coef
            sign, after_term = None, True
        position += 1
    if sign is not None or not after_term:
        raise InvalidArgumentError(f"Incomplete combination in {text!r}.")
    nonzero = tuple((c, ref) for ref, c in terms.items() if c != 0)
    if not nonzero:
        raise InvalidArgumentError(f"Combination cancels out in {text!r}.")
    return Combination(nonzero), position


def _expect(tokens, position, kind, text) -> None:
    if position >= len(tokens) or tokens[position][0] != kind:
        raise InvalidArgumentError(f"Expected {kind!r} in bracket expression {text!r}.")


def check(expr: BracketExpr, *, m: int) -> BracketExpr:
    """Validate field indices against the number of groups."""
    if isinstance(expr, Bracket):
        check(expr.left, m=m)
        check(expr.right, m=m)
        return expr
    for _, ref in expr.terms:
        if ref.kind not in KINDS:
            raise InvalidArgumentError(f"Unknown field kind {ref.kind!r}.")
        upper = m if ref.kind == "f" else m - 1
        if not 1 <= ref.index <= upper:
            raise InvalidArgumentError(f"Field {ref} does not exist for m={m}.")
    return expr


def is_rotation(expr: BracketExpr, *, m: int) -> bool:
    """Whether an expression only turns robots in place."""
    if isinstance(expr, Bracket):
        return False
    return all(ref.kind == "h" or ref == FieldRef("f", m) for _, ref in expr.terms)


def rotation_coefficients(combo: Combination, *, alloc: GroupAllocation) -> np.ndarray:
    """Multiple of a unit turn every robot receives from a rotation combination.

    Examples
    --------
    >>> from groupswarm.allocation import allocate_groups
    >>> rotation_coefficients(parse("h1+h2-f4"), alloc=allocate_groups(6))
    array([ 1,  0,  0,  0,  0, -1])
    """
    A = 1 - alloc.matrix.T.astype(int)
    c = np.zeros(alloc.n, dtype=int)
    for coef, ref in combo.terms:
        c += coef * A[:, ref.index - 1]
    return c


def affected_robots(expr: BracketExpr, *, alloc: GroupAllocation) -> FrozenSet[RobotLabel]:
    """Robots that an expression net-translates.

    Examples
    --------
    >>> from groupswarm.allocation import allocate_groups
    >>> alloc = allocate_groups(6)
    >>> sorted(affected_robots(parse("[h2,g1]"), alloc=alloc))
    [4, 5]
    >>> sorted(affected_robots(parse("[h1+h2-f4,g3]"), alloc=alloc))
    [1]
    >>> sorted(affected_robots(parse("[h1,g1]"), alloc=alloc))
    []
    """
    check(expr, m=alloc.m)
    return _affected(expr, alloc)


def _affected(expr: BracketExpr, alloc: GroupAllocation) -> FrozenSet[RobotLabel]:
    m = alloc.m
    if isinstance(expr, Combination):
        moved: Set[int] = set()
        for _, ref in expr.terms:
            if ref.kind in ("f", "g") and ref.index < m:
                moved.update(alloc.members(ref.index))
        return frozenset(moved)
    rotation, translation = _split(expr, m)
    if rotation is None:
        return frozenset()
    c = rotation_coefficients(rotation, alloc=alloc)
    return frozenset(j for j in _affected(translation, alloc) if c[j - 1] != 0)


def _split(
    expr: Bracket, m: int
) -> Tuple[Optional[Combination], Optional[BracketExpr]]:
    left_rot, right_rot = is_rotation(expr.left, m=m), is_rotation(expr.right, m=m)
    if left_rot and right_rot:
        return None, None
    if left_rot:
        return expr.left, expr.right  # type: ignore[return-value]
    if right_rot:
        return expr.right, expr.left  # type: ignore[return-value]
    raise InvalidArgumentError(
        f"Bracket {expr} needs a rotation combination on one side."
    )


def depth(expr: BracketExpr) -> int:
    """Number of nested bracket levels."""
    if isinstance(expr, Combination):
        return 0
    return 1 + max(depth(expr.left), depth(expr.right))


def order(expr: BracketExpr) -> int:
    """Primitive order.

    A single field counts one and a combination of several counts two. A
    bracket adds up both sides.

    Examples
    --------
    >>> [order(parse(s)) for s in ("g1", "[h2,g1]", "[h1+h3-f4,g2]", "[h1,[h3,g2]]")]
    [1, 2, 3, 3]
    """
    if isinstance(expr, Combination):
        return 1 if len(expr.terms) == 1 else 2
    return order(expr.left) + order(expr.right)


def is_realizable(expr: BracketExpr, *, alloc: GroupAllocation) -> bool:
    """Whether :func:`realize` accepts the expression."""
    try:
        _check_realizable(expr, alloc)
    except InvalidArgumentError:
        return False
    return True


def _check_realizable(expr: BracketExpr, alloc: GroupAllocation) -> None:
    m = alloc.m
    if isinstance(expr, Combination):
        if len(expr.terms) != 1:
            raise InvalidArgumentError(f"Leaf {expr} must be a single g field.")
        coef, ref = expr.terms[0]
        if ref.kind != "g" or abs(coef) != 1:
            raise InvalidArgumentError(f"Leaf {expr} must be a single g field.")
        return
    rotation, translation = _split(expr, m)
    if rotation is None or translation is None:
        raise InvalidArgumentError(f"Bracket {expr} of two rotations moves nothing.")
    _check_realizable(translation, alloc)
    c = rotation_coefficients(rotation, alloc=alloc)
    moved = np.asarray(sorted(_affected(translation, alloc)), dtype=int) - 1
    if np.any(np.abs(c[moved]) > 1):
        raise InvalidArgumentError(
            f"{rotation} turns some robots of {translation} by more than one unit."
        )


def realize(
    expr: BracketExpr,
    *,
    leg: float,
    alloc: GroupAllocation,
    params: SwarmParams,
    eps: float = defaults.EPSILON,
) -> ActivationSequence:
    """Compile an expression with innermost translation ``leg``.

    Affected robots travel ``2**depth(expr) * leg`` along their headings;
    everybody else returns to its pose, and all headings are restored.
    """
    check(expr, m=alloc.m)
    _check_realizable(expr, alloc)
    return _realize(expr, leg, alloc, params, eps)


def _realize(
    expr: BracketExpr,
    leg: float,
    alloc: GroupAllocation,
    params: SwarmParams,
    eps: float,
) -> ActivationSequence:
    if isinstance(expr, Combination):
        coef, ref = expr.terms[0]
        return primitives.bilateral_translation(
            ref.index, coef * leg, alloc=alloc, params=params, eps=eps
        )
    rotation, translation = _split(expr, alloc.m)
    inner = _realize(translation, leg, alloc, params, eps)  # type: ignore[arg-type]
    turn = half_turns(rotation, alloc=alloc, params=params, eps=eps)  # type: ignore[arg-type]
    seq = concatenate(
        [inner, turn, inner.reverse_direction(params=params), turn], n=alloc.n
    )
    if rotation is expr.right:
        # [E, X] = -[X, E]
        return seq.reverse_direction(params=params)
    return seq


def half_turns(
    combo: Combination,
    *,
    alloc: GroupAllocation,
    params: SwarmParams,
    eps: float = defaults.EPSILON,
) -> ActivationSequence:
    """Every term of a rotation combination applied for a half turn."""
    parts = []
    for coef, ref in combo.terms:
        theta = abs(coef) * np.pi
        if ref.kind == "h":
            parts.append(
                primitives.bilateral_rotation(
                    ref.index, theta, alloc=alloc, params=params, eps=eps
                )
            )
        else:
            parts.append(primitives.rotate_all(theta, params=params))
    return concatenate(parts, n=alloc.n)


class Primitive(NamedTuple):
    """Bracket expression bound to an allocation, with the robots it moves."""

    expr: BracketExpr
    affected: FrozenSet[RobotLabel]
    alloc: GroupAllocation
    params: SwarmParams
    eps: float = defaults.EPSILON

    @property
    def order(self) -> int:
        return order(self.expr)

    @property
    def gain(self) -> int:
        """Displacement per unit innermost leg."""
        return 2 ** depth(self.expr)

    def compile(
        self,
        d: float,
        *,
        state: Optional[SwarmState] = None,
        headings: Optional[HeadingMap] = None,
    ) -> ActivationSequence:
        """Aim the affected robots, then move them by signed ``d``.

        Parameters
        ----------
        d
            Signed displacement of every affected robot along its heading.
        state
            Current state. Required if ``headings`` is given.
        headings
            Absolute headings for (some of) the affected robots. Robots whose
            rotation rows are dependent on earlier ones keep their heading.

        Returns
        -------
        :
            Activation sequence.
        """
        n = self.alloc.n
        parts = []
        if headings:
            if state is None:
                raise InvalidArgumentError("Aiming robots requires the current state.")
            chosen = primitives.independent_robots(sorted(headings), alloc=self.alloc)
            aim, _ = primitives.orientation_control_absolute(
                {k: headings[k] for k in chosen},
                state=state,
                alloc=self.alloc,
                params=self.params,
                eps=self.eps,
            )
            parts.append(aim)
        if d != 0.0:
            move = realize(
                self.expr,
                leg=abs(d) / self.gain,
                alloc=self.alloc,
                params=self.params,
                eps=self.eps,
            )
            if d < 0.0:
                move = move.reverse_direction(params=self.params)
            parts.append(move)
        return concatenate(parts, n=n)


def canonical_sign(combo: Combination, *, m: int) -> Combination:
    """Representative of ``{X, -X}`` written with positive terms first.

    More positive terms win; on a tie ``f_m`` is positive, then the first term.

    Examples
    --------
    >>> print(canonical_sign(parse("h3-f4"), m=4))
    f4-h3
    >>> print(canonical_sign(parse("f4-h1-h3"), m=4))
    h1+h3-f4
    """
    positive = sum(1 for c, _ in combo.terms if c > 0)
    negative = len(combo.terms) - positive
    flip = negative > positive
    if negative == positive:
        fm = [c for c, ref in combo.terms if ref == FieldRef("f", m)]
        reference = fm[0] if fm else combo.terms[0][0]
        flip = reference < 0
    terms = [(-c if flip else c, ref) for c, ref in combo.terms]
    ranked = sorted(terms, key=lambda t: (t[0] < 0, _field_rank(t[1])))
    return Combination(tuple(ranked))


def _field_rank(ref: FieldRef) -> Tuple[int, int]:
    return (1 if ref.kind == "f" else 0), ref.index


def candidates(alloc: GroupAllocation) -> Iterator[BracketExpr]:
    """Realisable expressions in search order.

    Raw translations come first, then single-rotation brackets, then
    combinations by term count, then nested single-rotation brackets by depth.
    Within each stage groups are visited in ascending order.
    """
    m = alloc.m
    groups = range(1, m)
    for i in groups:
        yield leaf("g", i)
    for i in groups:
        for j in groups:
            if j != i:
                yield Bracket(leaf("h", j), leaf("g", i))
    for size in range(2, m + 1):
        for i in groups:
            for combo in _combinations(i, size, m):
                expr = Bracket(combo, leaf("g", i))
                if is_realizable(expr, alloc=alloc):
                    yield expr
    yield from _nested(alloc)


def _combinations(i: int, size: int, m: int) -> Iterator[Combination]:
    fields = [FieldRef("h", j) for j in range(1, m) if j != i] + [FieldRef("f", m)]
    seen: Set[Combination] = set()
    for chosen in itertools.combinations(fields, size):
        for signs in itertools.product((1, -1), repeat=size):
            combo = canonical_sign(Combination(tuple(zip(signs, chosen))), m=m)
            if combo not in seen:
                seen.add(combo)
                yield combo


def _nested(alloc: GroupAllocation) -> Iterator[BracketExpr]:
    # one rotation bracket per level, lowest order first within a level
    m = alloc.m
    rotations = [leaf("h", j) for j in range(1, m)]
    rotations += [
        Combination(((1, FieldRef("f", m)), (-1, FieldRef("h", j)))) for j in range(1, m)
    ]
    frontier: List[Tuple[BracketExpr, FrozenSet[int]]] = [
        (leaf("g", i), frozenset(alloc.members(i))) for i in range(1, m)
    ]
    seen = {affected for _, affected in frontier}
    for _ in range(m):
        layer = []
        for expr, affected in frontier:
            for rotation in rotations:
                c = rotation_coefficients(rotation, alloc=alloc)
                moved = frozenset(j for j in affected if c[j - 1] != 0)
                if moved:
                    layer.append((Bracket(rotation, expr), moved))
        layer.sort(key=lambda item: order(item[0]))
        expanded = []
        for nested, moved in layer:
            if moved in seen:
                continue
            seen.add(moved)
            expanded.append((nested, moved))
            if depth(nested) >= 2:
                yield nested
        if not expanded:
            return
        frontier = expanded


def compile_primitive(
    subgroup: Sequence[RobotLabel],
    *,
    alloc: GroupAllocation,
    params: Optional[SwarmParams] = None,
    eps: float = defaults.EPSILON,
    max_order: Optional[int] = None,
) -> Primitive:
    """Lowest-order primitive that net-moves exactly ``subgroup``.

    Single brackets reach order 3. Beyond that the search nests one rotation
    bracket per level, which larger swarms need for some single robots; pass
    ``max_order=3`` to stop at the single brackets.

    Examples
    --------
    >>> from groupswarm.allocation import allocate_groups
    >>> alloc = allocate_groups(6)
    >>> [str(compile_primitive(s, alloc=alloc).expr) for s in ([4, 5], [4, 5, 6], [2])]
    ['[h2,g1]', 'g1', '[h1+h3-f4,g2]']

    Raises
    ------
    NoPrimitiveError
        If no expression within ``max_order`` realises the subgroup. The error
        lists the smallest realisable supersets, or the realisable sets with
        the largest overlap.
    """
    target = frozenset(int(j) for j in subgroup)
    if not target:
        raise InvalidArgumentError("Subgroups must not be empty.")
    if not all(1 <= j <= alloc.n for j in target):
        raise InvalidArgumentError(f"Subgroup {sorted(target)} is not within 1..{alloc.n}.")
    if max_order is not None and max_order < 1:
        raise InvalidArgumentError(f"max_order must be >= 1, got {max_order}.")
    if params is None:
        params = SwarmParams(n=alloc.n)

    realised: List[FrozenSet[int]] = []
    for expr in candidates(alloc):
        if max_order is not None and order(expr) > max_order:
            continue
        affected = _affected(expr, alloc)
        if affected == target:
            logger.debug("Subgroup %s realised by %s.", sorted(target), expr)
            return Primitive(expr, affected, alloc, params, eps)
        realised.append(affected)
    raise NoPrimitiveError(target, _nearest(target, realised))


def _nearest(
    target: FrozenSet[int], realised: Sequence[FrozenSet[int]]
) -> List[FrozenSet[int]]:
    unique = sorted(set(realised), key=lambda s: (len(s), sorted(s)))
    supersets = [s for s in unique if target < s]
    if supersets:
        smallest = len(supersets[0])
        return [s for s in supersets if len(s) == smallest]
    best = max(len(s & target) for s in unique)
    return [s for s in unique if len(s & target) == best]


class _LibraryEntry(pydantic.BaseModel):
    subgroup: List[int]
    expr: str
    order: int = pydantic.Field(ge=1)


class _Library(pydantic.BaseModel):
    n: int = pydantic.Field(ge=1)
    primitives: List[_LibraryEntry]


def save_library(prims: Sequence[Primitive], path: str) -> None:
    """Write primitives as a JSON library file."""
    if not prims:
        raise InvalidArgumentError("A primitive library needs at least one primitive.")
    library = _Library(
        n=prims[0].alloc.n,
        primitives=[
            _LibraryEntry(subgroup=sorted(p.affected), expr=str(p.expr), order=p.order)
            for p in prims
        ],
    )
    with open(path, "w", encoding="utf-8") as f:
        f.write(library.model_dump_json(indent=2))
        f.write("\n")


def load_library(
    path: str,
    *,
    alloc: GroupAllocation,
    params: Optional[SwarmParams] = None,
    eps: float = defaults.EPSILON,
) -> List[Primitive]:
    """Read a JSON library file and re-check every entry against ``alloc``."""
    with open(path, encoding="utf-8") as f:
        text = f.read()
    try:
        library = _Library.model_validate_json(text)
    except pydantic.ValidationError as err:
        raise schema_error(err, text) from err
    if library.n != alloc.n:
        raise ScenarioValidationError(
            f"Library is for {library.n} robots, the allocation has {alloc.n}."
        )
    if params is None:
        params = SwarmParams(n=alloc.n)
    prims = []
    for entry in library.primitives:
        expr = check(parse(entry.expr), m=alloc.m)
        affected = affected_robots(expr, alloc=alloc)
        if affected != frozenset(entry.subgroup) or order(expr) != entry.order:
            raise ScenarioValidationError(
                f"Library entry {entry.expr} moves {sorted(affected)} with order "
                f"{order(expr)}, not {entry.subgroup} with order {entry.order}."
            )
        prims.append(Primitive(expr, affected, alloc, params, eps))
    return prims

"""Exceptions."""

import json
from typing import Iterable, Optional, Tuple

import pydantic


class InvalidArgumentError(ValueError):
    """An argument violates the precondition of an operation."""


class RankDeficientError(InvalidArgumentError):
    """Requested headings cannot be reached independently."""

    def __init__(self, robots: Iterable[int], message: Optional[str] = None):
        self.robots: Tuple[int, ...] = tuple(robots)
        if message is None:
            message = f"Orientation targets are rank deficient for robots {self.robots}."
        super().__init__(message)


class NoPrimitiveError(InvalidArgumentError):
    """No bracket expression realises the requested subgroup."""

    def __init__(self, subgroup: Iterable[int], nearest: Iterable[Iterable[int]]):
        self.subgroup: Tuple[int, ...] = tuple(sorted(subgroup))
        self.nearest: Tuple[Tuple[int, ...], ...] = tuple(
            tuple(sorted(s)) for s in nearest
        )
        super().__init__(
            f"No primitive moves exactly robots {self.subgroup}. "
            f"Nearest realisable subgroups: {self.nearest}."
        )


class ScenarioParseError(ValueError):
    """A scenario, batch or library file does not match its schema."""

    def __init__(self, message: str, *, line: Optional[int] = None, key: str = ""):
        self.line = line
        self.key = key
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key:
            where.append(f"key '{key}'")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


class ScenarioValidationError(ValueError):
    """A scenario is well-formed but violates an invariant."""


def schema_error(err: pydantic.ValidationError, text: str) -> ScenarioParseError:
    """Translate the first schema violation of a JSON document into a parse error."""
    first = err.errors()[0]
    key = ".".join(str(part) for part in first.get("loc", ()))
    line = None
    if first.get("type") == "json_invalid":
        try:
            json.loads(text)
        except json.JSONDecodeError as decode_error:
            line = decode_error.lineno
    return ScenarioParseError(first.get("msg", str(err)), line=line, key=key)

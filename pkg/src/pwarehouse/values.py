"""Scalar values and their comparison semantics.

Cell values are plain Python objects: ``int``, ``float``, ``str``,
``datetime.date``, or ``None`` for null. Attributes declare one of four
kinds. Integers and decimals form a single *numeric* comparison family
(an integer literal may be compared against a decimal attribute); text
and date are their own families, and any cross-family comparison raises
``KindMismatchError`` rather than coercing. Any comparison that touches
null is false.
"""
from __future__ import annotations

import re
from datetime import date
from enum import Enum
from typing import Union

from .errors import KindMismatchError

Value = Union[int, float, str, date, None]


class Kind(str, Enum):
    INTEGER = "integer"
    DECIMAL = "decimal"
    TEXT = "text"
    DATE = "date"


NUMERIC_KINDS = frozenset({Kind.INTEGER, Kind.DECIMAL})

_DATE_RE = re.compile(r"^\d{4}-\d{2}-\d{2}$")
_INT_RE = re.compile(r"^[+-]?\d+$")
_NUMBER_RE = re.compile(r"^[+-]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?$")


def family(kind: Kind) -> str:
    """Comparison family of a kind: 'numeric', 'text', or 'date'."""
    return "numeric" if kind in NUMERIC_KINDS else kind.value


def compatible(attr_kind: Kind, literal_kind: Kind) -> bool:
    return family(attr_kind) == family(literal_kind)


def kind_of(value: Value) -> Kind:
    """Kind of a non-null Python value."""
    if isinstance(value, bool):
        raise KindMismatchError("boolean values are not part of the value model")
    if isinstance(value, int):
        return Kind.INTEGER
    if isinstance(value, float):
        return Kind.DECIMAL
    if isinstance(value, date):
        return Kind.DATE
    if isinstance(value, str):
        return Kind.TEXT
    raise KindMismatchError(f"unsupported value type {type(value).__name__!r}")


def parse_cell(text: str, kind: Kind) -> Value:
    """Parse one CSV cell. Empty cell is null. Raises ValueError on junk."""
    if text == "":
        return None
    if kind is Kind.INTEGER:
        if not _INT_RE.match(text):
            raise ValueError(f"not an integer: {text!r}")
        return int(text)
    if kind is Kind.DECIMAL:
        value = float(text)
        if value != value or value in (float("inf"), float("-inf")):
            raise ValueError(f"non-finite decimal: {text!r}")
        return value
    if kind is Kind.DATE:
        if not _DATE_RE.match(text):
            raise ValueError(f"not an ISO date: {text!r}")
        return date.fromisoformat(text)
    return text


def parse_literal(text: str) -> Value:
    """Parse a predicate literal: number, 'quoted text', or bare ISO date."""
    text = text.strip()
    if not text:
        raise ValueError("empty literal")
    if text.startswith("'"):
        if len(text) < 2 or not text.endswith("'"):
            raise ValueError(f"unterminated text literal: {text!r}")
        body = text[1:-1]
        # single quotes escape by doubling, SQL style
        if "'" in body.replace("''", ""):
            raise ValueError(f"stray quote inside text literal: {text!r}")
        return body.replace("''", "'")
    if _DATE_RE.match(text):
        return date.fromisoformat(text)
    if _INT_RE.match(text):
        return int(text)
    if _NUMBER_RE.match(text):
        value = float(text)
        if value != value or value in (float("inf"), float("-inf")):
            raise ValueError(f"non-finite decimal: {text!r}")
        return value
    raise ValueError(f"not a literal: {text!r}")


def format_literal(value: Value) -> str:
    """Inverse of parse_literal for non-null values; exact round-trip."""
    if value is None:
        raise ValueError("null has no literal form")
    if isinstance(value, bool):
        raise ValueError("boolean values have no literal form")
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, date):
        return value.isoformat()
    return "'" + value.replace("'", "''") + "'"


def jsonable(value: Value) -> object:
    """JSON-safe rendering: dates become ISO strings, the rest pass through."""
    if isinstance(value, date):
        return value.isoformat()
    return value


def compare(op_symbol: str, left: Value, right: Value) -> bool:
    """Apply a comparison operator. Null on either side is always false.

    Callers are responsible for family compatibility; this function assumes
    the operands belong to one comparison family.
    """
    if left is None or right is None:
        return False
    if op_symbol == "=":
        return left == right
    if op_symbol == "!=":
        return left != right
    if op_symbol == "<":
        return left < right
    if op_symbol == "<=":
        return left <= right
    if op_symbol == ">":
        return left > right
    if op_symbol == ">=":
        return left >= right
    raise ValueError(f"unknown operator {op_symbol!r}")

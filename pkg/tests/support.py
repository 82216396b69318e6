"""Shared comparison helpers for engine-vs-oracle equivalence checks."""
from __future__ import annotations

import math
from collections import Counter

from pwarehouse.engine import QueryResult

FLOAT_TOL = 1e-9


def _cell_key(value):
    """Hashable, tolerance-friendly form of one cell."""
    if isinstance(value, float):
        return ("f", round(value, 9))
    return value


def rows_multiset_equal(a: list[tuple], b: list[tuple]) -> bool:
    return Counter(tuple(map(_cell_key, row)) for row in a) == Counter(
        tuple(map(_cell_key, row)) for row in b
    )


def _cells_close(x, y) -> bool:
    if isinstance(x, float) and isinstance(y, (int, float)):
        return math.isclose(x, y, rel_tol=FLOAT_TOL, abs_tol=FLOAT_TOL)
    if isinstance(y, float) and isinstance(x, (int, float)):
        return math.isclose(x, y, rel_tol=FLOAT_TOL, abs_tol=FLOAT_TOL)
    return x == y


def rows_ordered_equal(a: list[tuple], b: list[tuple]) -> bool:
    if len(a) != len(b):
        return False
    return all(
        len(ra) == len(rb) and all(_cells_close(x, y) for x, y in zip(ra, rb))
        for ra, rb in zip(a, b)
    )


def results_equivalent(got: QueryResult, want: QueryResult, *, grouped: bool) -> bool:
    """Column names must match; grouped output is order-sensitive (sorted by
    key), ungrouped compares as a multiset of rows."""
    if got.columns != want.columns:
        return False
    if grouped:
        return rows_ordered_equal(got.rows, want.rows)
    return rows_multiset_equal(got.rows, want.rows)


def is_grouped(q) -> bool:
    from pwarehouse.query_language import AggregateItem

    return bool(q.group_by) or any(
        isinstance(item, AggregateItem) for item in (q.projection or ())
    )

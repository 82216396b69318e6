"""Independent reference implementation used by tests and golden files.

Everything here is written the slow, obvious way and shares no evaluation
code with the warehouse scan, the preference evaluator, or the view builder:
its own comparator, its own all-or-majority rule, its own star restriction
and join (dict records), its own aggregation. It consumes only the frozen
data shapes (Dataset, Preference, Query) so both sides agree on what is
being asked, never on how to answer it.
"""
from __future__ import annotations

from typing import Sequence, Union

from .engine import AnsweredFrom, QueryResult
from .preferences import Preference, Profile
from .query_language import AggregateItem, Query
from .warehouse import Dataset


def _holds(op: str, left, right) -> bool:
    if left is None or right is None:
        return False
    if op == "=":
        return left == right
    if op == "!=":
        return left != right
    if op == "<":
        return left < right
    if op == "<=":
        return left <= right
    if op == ">":
        return left > right
    if op == ">=":
        return left >= right
    raise ValueError(op)


def _attr_pos(dim, attr_name: str) -> int:
    names = [a.name.casefold() for a in dim.attributes]
    return names.index(attr_name.casefold())


def _pref_holds(pref: Preference, dim, row) -> bool:
    if pref.is_all:
        return True
    return _holds(pref.operator.symbol, row[_attr_pos(dim, pref.attribute)], pref.value)


def surviving_rows(ds: Dataset, dim_name: str, prefs: Sequence[Preference]) -> set[int]:
    """Dimension row ordinals kept by the all-or-majority rule, naively."""
    dim = ds.dimension(dim_name)
    mine = [p for p in prefs if p.dimension.casefold() == dim.name.casefold()]
    if not mine:
        return set(range(len(dim.rows)))
    keep_all = set()
    for ordinal, row in enumerate(dim.rows):
        if all(_pref_holds(p, dim, row) for p in mine):
            keep_all.add(ordinal)
    if keep_all:
        return keep_all
    keep_majority = set()
    for ordinal, row in enumerate(dim.rows):
        hits = 0
        for p in mine:
            if _pref_holds(p, dim, row):
                hits += 1
        if hits > len(mine) / 2:
            keep_majority.add(ordinal)
    return keep_majority


def restricted_fact_ids(ds: Dataset, prefs: Sequence[Preference]) -> set[int]:
    """Fact row ids whose every foreign key lands in its surviving set."""
    per_dim_keys: list[tuple[int, set]] = []
    for i, fk in enumerate(ds.fact.foreign_keys):
        dim = ds.dimension(fk.dimension)
        kept = surviving_rows(ds, dim.name, prefs)
        keys = {dim.rows[ordinal][_key_pos(dim)] for ordinal in kept}
        per_dim_keys.append((i, keys))
    ids = set()
    for fid, frow in enumerate(ds.fact.rows):
        if all(frow[i] in keys for i, keys in per_dim_keys):
            ids.add(fid)
    return ids


def _key_pos(dim) -> int:
    for i, a in enumerate(dim.attributes):
        if a.role == "key":
            return i
    raise ValueError(f"dimension {dim.name!r} has no key")


def _joined_record(ds: Dataset, fid: int) -> dict:
    frow = ds.fact.rows[fid]
    n_fk = len(ds.fact.foreign_keys)
    record: dict = {}
    for j, m in enumerate(ds.fact.measures):
        record[m.name] = frow[n_fk + j]
    for i, fk in enumerate(ds.fact.foreign_keys):
        dim = ds.dimension(fk.dimension)
        key = frow[i]
        drow = None
        for row in dim.rows:  # linear key lookup on purpose
            if row[_key_pos(dim)] == key:
                drow = row
                break
        for pos, a in enumerate(dim.attributes):
            record[f"{dim.name}.{a.name}"] = drow[pos]
    return record


def _star_record_columns(ds: Dataset) -> list[str]:
    cols = [m.name for m in ds.fact.measures]
    for fk in ds.fact.foreign_keys:
        dim = ds.dimension(fk.dimension)
        cols.extend(f"{dim.name}.{a.name}" for a in dim.attributes)
    return cols


def _aggregate_records(q: Query, records: list[dict]) -> list[tuple]:
    def agg(func: str, values: list, rows: int):
        present = [v for v in values if v is not None]
        if func == "count":
            return rows
        if func == "sum":
            if not present:
                return None
            total = present[0]
            for v in present[1:]:
                total = total + v
            return total
        if func == "avg":
            if rows == 0 or not present:
                return None
            total = 0.0
            for v in present:
                total += v
            return total / rows
        if func == "min":
            return min(present) if present else None
        if func == "max":
            return max(present) if present else None
        raise ValueError(func)

    items = list(q.projection or ())
    if not q.group_by:
        row = []
        for item in items:
            assert isinstance(item, AggregateItem)
            values = [r[item.column.canonical] for r in records]
            row.append(agg(item.func, values, len(records)))
        return [tuple(row)]

    buckets: dict[tuple, list[dict]] = {}
    for r in records:
        key = tuple(r[c.canonical] for c in q.group_by)
        buckets.setdefault(key, []).append(r)

    def sort_key(key: tuple) -> tuple:
        return tuple((v is not None, v) for v in key)

    key_pos = {c.canonical: i for i, c in enumerate(q.group_by)}
    out = []
    for key in sorted(buckets, key=sort_key):
        members = buckets[key]
        row = []
        for item in items:
            if isinstance(item, AggregateItem):
                values = [r[item.column.canonical] for r in members]
                row.append(agg(item.func, values, len(members)))
            else:
                row.append(key[key_pos[item.canonical]])
        out.append(tuple(row))
    return out


def oracle_evaluate(
    q: Query, profile: Union[Profile, Sequence[Preference]], ds: Dataset
) -> QueryResult:
    """Re-derive the personalized answer from first principles.

    Restrict every dimension by the all-or-majority rule, restrict the fact
    table through foreign-key membership, join, then apply the query's own
    predicates and evaluate. With no preferences the restriction is the
    identity and the result is the plain warehouse answer.
    """
    prefs = list(profile.preferences) if isinstance(profile, Profile) else list(profile)
    label = AnsweredFrom.FULL_WAREHOUSE if not prefs else AnsweredFrom.USER_VIEW

    if q.is_star:
        fact_ids = sorted(restricted_fact_ids(ds, prefs))
        records = [_joined_record(ds, fid) for fid in fact_ids]
        records = [
            r
            for r in records
            if all(
                _holds(p.operator.symbol, r[p.column.canonical], p.value)
                for p in q.predicates
            )
        ]
        has_agg = bool(q.group_by) or any(
            isinstance(item, AggregateItem) for item in (q.projection or ())
        )
        if has_agg:
            rows = _aggregate_records(q, records)
            columns = [item.canonical for item in (q.projection or ())]
        elif q.projection is None:
            columns = _star_record_columns(ds)
            rows = [tuple(r[c] for c in columns) for r in records]
        else:
            columns = [item.canonical for item in q.projection]
            rows = [tuple(r[c] for c in columns) for r in records]
        return QueryResult(columns=columns, rows=rows, answered_from=label)

    dim = ds.dimension(q.source)
    kept = surviving_rows(ds, dim.name, prefs)
    records = []
    for ordinal in sorted(kept):
        row = dim.rows[ordinal]
        record = {f"{dim.name}.{a.name}": row[i] for i, a in enumerate(dim.attributes)}
        if all(
            _holds(p.operator.symbol, record[p.column.canonical], p.value)
            for p in q.predicates
        ):
            records.append(record)
    if q.projection is None:
        columns = [f"{dim.name}.{a.name}" for a in dim.attributes]
    else:
        columns = [item.canonical for item in q.projection]
    rows = [tuple(r[c] for c in columns) for r in records]
    return QueryResult(columns=columns, rows=rows, answered_from=label)

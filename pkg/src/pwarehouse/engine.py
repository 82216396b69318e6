"""Query evaluation and personalized routing.

``evaluate`` runs a bound query against either the full warehouse or a
materialized view. Star queries push dimension predicates down to a single
scan of each constrained dimension, then stream fact rows through foreign-key
membership checks, so the work is proportional to the rows actually visited:
the whole fact table for the warehouse, only the surviving identifiers for an
IDS view.

``route`` is the personalization front door: with personalization off or an
effectively empty profile the query hits the warehouse; otherwise it must be
answered from the session's bound view, with the query's own predicates acting
as soft filters on top.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Optional, Union

from .errors import (
    KindMismatchError,
    StaleViewError,
    UnknownNameError,
    ViewNotBuiltError,
)
from .preferences import Profile, effective_hash, effective_profile
from .query_language import AggregateItem, ColumnRef, Query, QueryPredicate, bind_column
from .values import Value, compare, compatible, kind_of, jsonable
from .views import MaterializedView
from .warehouse import Dataset, DimensionTable, Row, star_columns


class AnsweredFrom(Enum):
    FULL_WAREHOUSE = "FULL_WAREHOUSE"
    USER_VIEW = "USER_VIEW"
    GROUP_VIEW = "GROUP_VIEW"


@dataclass
class QueryResult:
    columns: list[str]
    rows: list[Row]
    answered_from: AnsweredFrom

    def to_json(self) -> dict:
        return {
            "columns": self.columns,
            "rows": [[jsonable(v) for v in row] for row in self.rows],
            "answered_from": self.answered_from.value,
        }


@dataclass
class Session:
    """One authenticated user's routing state."""

    user_id: str
    personalization_enabled: bool = True
    degree: float = 1.0
    profile: Optional[Profile] = None
    bound_view: Optional[MaterializedView] = None
    needs_onboarding: bool = False
    token: str = field(default="", repr=False)


Source = Union[Dataset, MaterializedView]


def _dataset_of(source: Source) -> Dataset:
    if isinstance(source, Dataset):
        return source
    if source.dataset is None:
        raise ValueError("view is not attached to a dataset")
    return source.dataset


def _check_predicate_kinds(q: Query) -> None:
    for p in q.predicates:
        if not compatible(p.column.kind, kind_of(p.value)):
            raise KindMismatchError(
                f"predicate on {p.column.canonical} ({p.column.kind.value}) "
                f"has a {kind_of(p.value).value} literal"
            )


def _group_sort_key(key: tuple) -> tuple:
    # nulls sort before every value of the column's kind
    return tuple((v is not None, v) for v in key)


class _Accumulator:
    """Streaming state for one aggregate column."""

    __slots__ = ("func", "rows", "total", "best")

    def __init__(self, func: str):
        self.func = func
        self.rows = 0
        self.total: Value = None
        self.best: Value = None

    def add(self, value: Value) -> None:
        self.rows += 1
        if value is None:
            return
        if self.func in ("sum", "avg"):
            self.total = value if self.total is None else self.total + value
        elif self.func == "min":
            self.best = value if self.best is None else min(self.best, value)
        elif self.func == "max":
            self.best = value if self.best is None else max(self.best, value)

    def result(self) -> Value:
        if self.func == "count":
            return self.rows
        if self.func == "sum":
            return self.total
        if self.func == "avg":
            if self.rows == 0 or self.total is None:
                return None
            return float(self.total) / self.rows
        return self.best


def _project_plain(
    items: Iterable[ColumnRef],
    scan: Iterator[tuple],
    getters: dict[str, object],
) -> list[Row]:
    fetch = [getters[item.canonical] for item in items]
    return [tuple(g(ctx) for g in fetch) for ctx in scan]


def _aggregate(
    q: Query,
    scan: Iterator[tuple],
    getters: dict[str, object],
) -> list[Row]:
    items = list(q.projection or ())
    key_fetch = [getters[c.canonical] for c in q.group_by]
    agg_items = [(i, item) for i, item in enumerate(items) if isinstance(item, AggregateItem)]
    agg_fetch = [getters[item.column.canonical] for _, item in agg_items]

    if not q.group_by:
        accs = [_Accumulator(item.func) for _, item in agg_items]
        for ctx in scan:
            for acc, fetch in zip(accs, agg_fetch):
                acc.add(fetch(ctx))
        out: list[Value] = []
        for item, acc in zip((it for _, it in agg_items), accs):
            out.append(acc.result())
        return [tuple(out)]

    groups: dict[tuple, list[_Accumulator]] = {}
    for ctx in scan:
        key = tuple(fetch(ctx) for fetch in key_fetch)
        accs = groups.get(key)
        if accs is None:
            accs = [_Accumulator(item.func) for _, item in agg_items]
            groups[key] = accs
        for acc, fetch in zip(accs, agg_fetch):
            acc.add(fetch(ctx))

    key_pos = {c.canonical: i for i, c in enumerate(q.group_by)}
    rows: list[Row] = []
    for key in sorted(groups, key=_group_sort_key):
        accs = iter(groups[key])
        row: list[Value] = []
        for item in items:
            if isinstance(item, AggregateItem):
                row.append(next(accs).result())
            else:
                row.append(key[key_pos[item.canonical]])
        rows.append(tuple(row))
    return rows


def _dimension_predicate_sets(
    ds: Dataset,
    q: Query,
    restrict: Optional[dict[str, frozenset[int]]],
) -> tuple[dict[str, frozenset[int]], list[QueryPredicate]]:
    """Split predicates: per-dimension allowed-ordinal sets plus measure preds."""
    by_dim: dict[str, list[QueryPredicate]] = {}
    measure_preds: list[QueryPredicate] = []
    for p in q.predicates:
        if p.column.is_measure:
            measure_preds.append(p)
        else:
            by_dim.setdefault(p.column.table, []).append(p)

    allowed: dict[str, frozenset[int]] = {}
    for dim_name, preds in by_dim.items():
        dim = ds.dimension(dim_name)
        positions = [(dim.attribute_position(p.column.name), p) for p in preds]
        candidates: Iterable[int]
        if restrict is not None and dim_name in restrict:
            candidates = sorted(restrict[dim_name])
        else:
            candidates = range(len(dim.rows))
        keep = frozenset(
            ordinal
            for ordinal in candidates
            if all(
                compare(p.operator.symbol, dim.rows[ordinal][pos], p.value)
                for pos, p in positions
            )
        )
        allowed[dim_name] = keep
    return allowed, measure_preds


def _star_scan_fact(
    ds: Dataset,
    q: Query,
    fact_ids: Optional[Iterable[int]],
    vector_restrict: Optional[dict[str, frozenset[int]]],
) -> tuple[Iterator[tuple], dict[str, object]]:
    """Scan fact rows (optionally a fixed id subset), resolving dimension
    attributes through the base tables. Returns (scan, getters): the scan
    yields opaque contexts, the getters pull column values out of one."""
    fact = ds.fact
    n_fk = len(fact.foreign_keys)
    dim_of_fk: list[DimensionTable] = [ds.dimension(fk.dimension) for fk in fact.foreign_keys]
    fk_of_dim = {dim.name: i for i, dim in enumerate(dim_of_fk)}

    allowed, measure_preds = _dimension_predicate_sets(ds, q, vector_restrict)
    constrained = [
        (fk_of_dim[name], dim_of_fk[fk_of_dim[name]].key_index, ids)
        for name, ids in allowed.items()
    ]
    measure_checks = [
        (fact.measure_position(p.column.name), p.operator.symbol, p.value)
        for p in measure_preds
    ]

    # figure out which dimensions the output actually touches
    needed: set[str] = set()
    out_items = q.projection
    if out_items is None:
        needed.update(dim.name for dim in dim_of_fk)
    else:
        for item in out_items:
            col = item.column if isinstance(item, AggregateItem) else item
            if not col.is_measure:
                needed.add(col.table)
        for col in q.group_by:
            needed.add(col.table)
    needed_fks = sorted(fk_of_dim[name] for name in needed)

    def scan() -> Iterator[tuple]:
        ids = range(len(fact.rows)) if fact_ids is None else fact_ids
        rows = fact.rows
        for fid in ids:
            frow = rows[fid]
            ok = True
            for i, key_index, ok_ids in constrained:
                if key_index[frow[i]] not in ok_ids:
                    ok = False
                    break
            if not ok:
                continue
            for pos, sym, val in measure_checks:
                if not compare(sym, frow[pos], val):
                    ok = False
                    break
            if not ok:
                continue
            ords = tuple(dim_of_fk[i].key_index[frow[i]] for i in needed_fks)
            yield (frow, ords)

    ord_slot = {fk_i: slot for slot, fk_i in enumerate(needed_fks)}
    getters: dict[str, object] = {}
    for m in fact.measures:
        pos = fact.measure_position(m.name)
        getters[m.name] = lambda ctx, pos=pos: ctx[0][pos]
    for i, dim in enumerate(dim_of_fk):
        if i not in ord_slot:
            continue
        slot = ord_slot[i]
        for a in dim.attributes:
            apos = dim.attribute_position(a.name)
            getters[f"{dim.name}.{a.name}"] = (
                lambda ctx, dim=dim, slot=slot, apos=apos: dim.rows[ctx[1][slot]][apos]
            )
    return scan(), getters


def _star_scan_joined(view: MaterializedView, q: Query) -> tuple[Iterator[tuple], dict[str, object]]:
    """Scan a FULL view's pre-joined rows; predicates filter tuples in place."""
    assert view.rows is not None
    col_pos = {name: i for i, name in enumerate(view.rows.columns)}
    checks = [
        (col_pos[p.column.canonical], p.operator.symbol, p.value) for p in q.predicates
    ]

    def scan() -> Iterator[tuple]:
        for row in view.rows.rows:
            if all(compare(sym, row[pos], val) for pos, sym, val in checks):
                yield row

    getters = {
        name: (lambda ctx, pos=pos: ctx[pos]) for name, pos in col_pos.items()
    }
    return scan(), getters


def _star_columns_for(ds: Dataset, q: Query) -> tuple[list[str], Optional[list[ColumnRef]]]:
    if q.projection is not None:
        return [item.canonical for item in q.projection], None
    refs: list[ColumnRef] = []
    for m in ds.fact.measures:
        refs.append(bind_column(ds, q.source, True, None, m.name))
    for fk in ds.fact.foreign_keys:
        dim = ds.dimension(fk.dimension)
        for a in dim.attributes:
            refs.append(bind_column(ds, q.source, True, dim.name, a.name))
    return star_columns(ds), refs


def _evaluate_star(q: Query, source: Source) -> QueryResult:
    ds = _dataset_of(source)
    if isinstance(source, Dataset):
        scan, getters = _star_scan_fact(ds, q, None, None)
    elif source.rows is not None:
        scan, getters = _star_scan_joined(source, q)
    else:
        restrict = {name: vec.ids for name, vec in source.dim_vectors.items()}
        scan, getters = _star_scan_fact(ds, q, sorted(source.fact_ids), restrict)

    columns, star_refs = _star_columns_for(ds, q)
    if q.group_by or any(
        isinstance(item, AggregateItem) for item in (q.projection or ())
    ):
        rows = _aggregate(q, scan, getters)
    else:
        items = list(q.projection) if q.projection is not None else star_refs
        rows = _project_plain(items, scan, getters)
    return QueryResult(columns=columns, rows=rows, answered_from=_label(source))


def _evaluate_dimension(q: Query, source: Source) -> QueryResult:
    ds = _dataset_of(source)
    dim = ds.dimension(q.source)
    if isinstance(source, Dataset):
        ordinals: Iterable[int] = range(len(dim.rows))
    else:
        vec = source.dim_vectors.get(dim.name)
        if vec is None:
            raise UnknownNameError(f"view has no vector for dimension {dim.name!r}")
        ordinals = sorted(vec.ids)

    checks = [
        (dim.attribute_position(p.column.name), p.operator.symbol, p.value)
        for p in q.predicates
    ]
    if q.projection is None:
        columns = [f"{dim.name}.{a.name}" for a in dim.attributes]
        positions = list(range(len(dim.attributes)))
    else:
        columns = [item.canonical for item in q.projection]
        positions = [dim.attribute_position(item.name) for item in q.projection]  # type: ignore[union-attr]

    rows: list[Row] = []
    for ordinal in ordinals:
        row = dim.rows[ordinal]
        if all(compare(sym, row[pos], val) for pos, sym, val in checks):
            rows.append(tuple(row[pos] for pos in positions))
    return QueryResult(columns=columns, rows=rows, answered_from=_label(source))


def _label(source: Source) -> AnsweredFrom:
    if isinstance(source, Dataset):
        return AnsweredFrom.FULL_WAREHOUSE
    return AnsweredFrom.GROUP_VIEW if source.is_group else AnsweredFrom.USER_VIEW


def evaluate(q: Query, source: Source) -> QueryResult:
    """Select-project-aggregate over a dataset or a materialized view.

    Ungrouped row order follows the source scan order; grouped output is
    sorted ascending by group key (nulls first). ``count`` counts rows,
    ``avg`` is sum over row count in double precision, ``sum``/``min``/
    ``max`` skip nulls and are null when nothing contributes. An ungrouped
    aggregate over empty input yields one row (count 0, the rest null).
    """
    _check_predicate_kinds(q)
    if q.is_star:
        return _evaluate_star(q, source)
    return _evaluate_dimension(q, source)


def route(q: Query, session: Session, ds: Dataset) -> QueryResult:
    """Answer a session's query per its personalization setting.

    Personalization off, no profile, or a degree that empties the profile:
    the full warehouse answers. Otherwise the session's bound view must
    exist, match the effective profile, and be fresh; the query's own
    predicates are applied on top of it as soft preferences.
    """
    if not session.personalization_enabled or session.profile is None:
        return evaluate(q, ds)
    effective = effective_profile(session.profile, session.degree)
    if not effective:
        return evaluate(q, ds)

    view = session.bound_view
    wanted_hash = effective_hash(session.profile, session.degree)
    if view is None or view.profile_hash != wanted_hash:
        raise ViewNotBuiltError(
            f"no view built for user {session.user_id!r} at degree {session.degree}"
        )
    if view.is_stale(ds):
        raise StaleViewError(
            "the bound view predates the latest ingestion; rebuild it"
        )
    return evaluate(q, view)

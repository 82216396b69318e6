"""Star-schema warehouse: schema metadata, tables, CSV ingestion, star join.

One fact table, n dimension tables. Rows are plain tuples aligned with the
owning table's attribute list; fact rows get dense integer ids in ingestion
order. Ingestion is batch-atomic: a bad CSV leaves the dataset untouched.

Joined output columns are named ``Dimension.attribute``; measures keep their
bare name. Layout is measures first (declared order), then each dimension's
attributes grouped in foreign-key declaration order.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .errors import IngestError, SchemaError, UnknownNameError
from .values import Kind, NUMERIC_KINDS, Value, parse_cell

Row = tuple  # one Value per attribute, in table attribute order

_ROLES = ("key", "attribute")


@dataclass(frozen=True)
class AttributeDef:
    name: str
    kind: Kind
    role: str = "attribute"


@dataclass(frozen=True)
class ForeignKey:
    dimension: str
    column: str


@dataclass
class DimensionTable:
    name: str
    attributes: list[AttributeDef]
    rows: list[Row] = field(default_factory=list)
    key_index: dict[Value, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self._attr_pos = {a.name.casefold(): i for i, a in enumerate(self.attributes)}
        self._key_pos = next(
            i for i, a in enumerate(self.attributes) if a.role == "key"
        )

    @property
    def key_position(self) -> int:
        return self._key_pos

    @property
    def key_attribute(self) -> AttributeDef:
        return self.attributes[self._key_pos]

    def attribute_position(self, name: str) -> int:
        try:
            return self._attr_pos[name.casefold()]
        except KeyError:
            raise UnknownNameError(
                f"dimension {self.name!r} has no attribute {name!r}"
            ) from None

    def attribute(self, name: str) -> AttributeDef:
        return self.attributes[self.attribute_position(name)]


@dataclass
class FactTable:
    name: str
    foreign_keys: list[ForeignKey]
    measures: list[AttributeDef]
    rows: list[Row] = field(default_factory=list)

    def __post_init__(self) -> None:
        # column layout: foreign-key columns first, then measures
        self.columns = [fk.column for fk in self.foreign_keys] + [
            m.name for m in self.measures
        ]
        self._col_pos = {c.casefold(): i for i, c in enumerate(self.columns)}

    def measure_position(self, name: str) -> int:
        fold = name.casefold()
        for i, m in enumerate(self.measures):
            if m.name.casefold() == fold:
                return len(self.foreign_keys) + i
        raise UnknownNameError(f"fact {self.name!r} has no measure {name!r}")

    def measure(self, name: str) -> AttributeDef:
        fold = name.casefold()
        for m in self.measures:
            if m.name.casefold() == fold:
                return m
        raise UnknownNameError(f"fact {self.name!r} has no measure {name!r}")


@dataclass
class Dataset:
    fact: FactTable
    dimensions: dict[str, DimensionTable]
    ingest_generation: int = 0

    def __post_init__(self) -> None:
        self._dim_by_fold = {name.casefold(): name for name in self.dimensions}

    def dimension(self, name: str) -> DimensionTable:
        try:
            return self.dimensions[self._dim_by_fold[name.casefold()]]
        except KeyError:
            raise UnknownNameError(f"no dimension named {name!r}") from None

    def has_dimension(self, name: str) -> bool:
        return name.casefold() in self._dim_by_fold

    def is_fact(self, name: str) -> bool:
        return name.casefold() == self.fact.name.casefold()


def _attr_def(raw: Mapping, *, allow_role: bool) -> AttributeDef:
    try:
        name = raw["name"]
        kind = Kind(raw["kind"])
    except KeyError as exc:
        raise SchemaError(f"attribute entry missing {exc.args[0]!r}") from None
    except ValueError:
        raise SchemaError(f"unknown kind {raw.get('kind')!r}") from None
    role = raw.get("role", "attribute") if allow_role else "attribute"
    if role not in _ROLES:
        raise SchemaError(f"unknown role {role!r} on attribute {name!r}")
    if not isinstance(name, str) or not name:
        raise SchemaError("attribute name must be a non-empty string")
    return AttributeDef(name=name, kind=kind, role=role)


def load_schema(schema_doc: str | bytes | Mapping) -> Dataset:
    """Build an empty Dataset from a schema document (JSON text or mapping).

    Errors: duplicate table names, a fact foreign key naming a missing
    dimension, a dimension without exactly one key attribute.
    """
    if isinstance(schema_doc, (str, bytes)):
        try:
            doc = json.loads(schema_doc)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"schema is not valid JSON: {exc}") from None
    else:
        doc = schema_doc
    if not isinstance(doc, Mapping) or "fact" not in doc:
        raise SchemaError("schema must be an object with 'fact' and 'dimensions'")

    dimensions: dict[str, DimensionTable] = {}
    seen_tables: set[str] = set()
    for dim_doc in doc.get("dimensions", []):
        name = dim_doc.get("name")
        if not isinstance(name, str) or not name:
            raise SchemaError("dimension name must be a non-empty string")
        if name.casefold() in seen_tables:
            raise SchemaError(f"duplicate table name {name!r}")
        seen_tables.add(name.casefold())
        attrs = [_attr_def(a, allow_role=True) for a in dim_doc.get("attributes", [])]
        folds = [a.name.casefold() for a in attrs]
        if len(set(folds)) != len(folds):
            raise SchemaError(f"duplicate attribute name in dimension {name!r}")
        keys = [a for a in attrs if a.role == "key"]
        if len(keys) != 1:
            raise SchemaError(
                f"dimension {name!r} must have exactly one key attribute, found {len(keys)}"
            )
        dimensions[name] = DimensionTable(name=name, attributes=attrs)

    fact_doc = doc["fact"]
    fact_name = fact_doc.get("name")
    if not isinstance(fact_name, str) or not fact_name:
        raise SchemaError("fact name must be a non-empty string")
    if fact_name.casefold() in seen_tables:
        raise SchemaError(f"duplicate table name {fact_name!r}")

    foreign_keys = []
    for fk_doc in fact_doc.get("foreign_keys", []):
        dim_name, column = fk_doc.get("dimension"), fk_doc.get("column")
        if dim_name is None or column is None:
            raise SchemaError("foreign key entries need 'dimension' and 'column'")
        if dim_name.casefold() not in {n.casefold() for n in dimensions}:
            raise SchemaError(f"fact references missing dimension {dim_name!r}")
        foreign_keys.append(ForeignKey(dimension=dim_name, column=column))
    # joined columns are named "Dimension.attr", so role-playing (two foreign
    # keys into one dimension) would be ambiguous
    dim_folds = [fk.dimension.casefold() for fk in foreign_keys]
    if len(set(dim_folds)) != len(dim_folds):
        raise SchemaError("fact may reference each dimension at most once")

    measures = [_attr_def(m, allow_role=False) for m in fact_doc.get("measures", [])]
    for m in measures:
        if m.kind not in NUMERIC_KINDS:
            raise SchemaError(f"measure {m.name!r} must be integer or decimal")
    col_folds = [fk.column.casefold() for fk in foreign_keys] + [
        m.name.casefold() for m in measures
    ]
    if len(set(col_folds)) != len(col_folds):
        raise SchemaError("duplicate column name in fact table")

    fact = FactTable(name=fact_name, foreign_keys=foreign_keys, measures=measures)
    return Dataset(fact=fact, dimensions=dimensions)


def _read_csv(content: str) -> tuple[list[str], list[list[str]]]:
    reader = csv.reader(io.StringIO(content))
    try:
        header = next(reader)
    except StopIteration:
        raise IngestError("CSV has no header row") from None
    return header, [row for row in reader if row]


def _header_positions(header: Sequence[str], expected: Sequence[str]) -> list[int]:
    """Map expected column names to header positions; exact names, any order."""
    if sorted(header) != sorted(expected):
        raise IngestError(
            f"CSV header mismatch: expected columns {sorted(expected)}, got {sorted(header)}"
        )
    index = {name: i for i, name in enumerate(header)}
    return [index[name] for name in expected]


def ingest_dimension(ds: Dataset, dim_name: str, csv_content: str) -> int:
    """Append a dimension CSV batch. Returns the row count ingested.

    The whole batch is validated (cell kinds, key uniqueness) before any row
    is appended. Bumps the dataset's ingest generation on success.
    """
    dim = ds.dimension(dim_name)
    header, raw_rows = _read_csv(csv_content)
    positions = _header_positions(header, [a.name for a in dim.attributes])

    new_rows: list[Row] = []
    new_keys: dict[Value, int] = {}
    for n, raw in enumerate(raw_rows, start=1):
        if len(raw) != len(header):
            raise IngestError(f"data row {n}: expected {len(header)} cells", row=n)
        values = []
        for attr, pos in zip(dim.attributes, positions):
            try:
                values.append(parse_cell(raw[pos], attr.kind))
            except ValueError as exc:
                raise IngestError(f"data row {n}, column {attr.name!r}: {exc}", row=n) from None
        key = values[dim.key_position]
        if key is None:
            raise IngestError(f"data row {n}: null key", row=n)
        if key in dim.key_index or key in new_keys:
            raise IngestError(f"data row {n}: duplicate key {key!r}", row=n)
        new_keys[key] = len(dim.rows) + len(new_rows)
        new_rows.append(tuple(values))

    dim.rows.extend(new_rows)
    dim.key_index.update(new_keys)
    ds.ingest_generation += 1
    return len(new_rows)


def ingest_fact(ds: Dataset, csv_content: str) -> int:
    """Append a fact CSV batch; every foreign key must resolve.

    Dangling keys report the offending data row and key. Batch-atomic.
    """
    fact = ds.fact
    header, raw_rows = _read_csv(csv_content)
    positions = _header_positions(header, fact.columns)
    fk_dims = [ds.dimension(fk.dimension) for fk in fact.foreign_keys]

    new_rows: list[Row] = []
    for n, raw in enumerate(raw_rows, start=1):
        if len(raw) != len(header):
            raise IngestError(f"data row {n}: expected {len(header)} cells", row=n)
        values: list[Value] = []
        for i, (fk, dim) in enumerate(zip(fact.foreign_keys, fk_dims)):
            cell = raw[positions[i]]
            try:
                key = parse_cell(cell, dim.key_attribute.kind)
            except ValueError as exc:
                raise IngestError(f"data row {n}, column {fk.column!r}: {exc}", row=n) from None
            if key is None or key not in dim.key_index:
                raise IngestError(
                    f"data row {n}: foreign key {fk.column!r}={cell!r} has no match in "
                    f"dimension {dim.name!r}",
                    row=n,
                )
            values.append(key)
        for j, measure in enumerate(fact.measures):
            cell = raw[positions[len(fact.foreign_keys) + j]]
            try:
                values.append(parse_cell(cell, measure.kind))
            except ValueError as exc:
                raise IngestError(f"data row {n}, column {measure.name!r}: {exc}", row=n) from None
        new_rows.append(tuple(values))

    fact.rows.extend(new_rows)
    ds.ingest_generation += 1
    return len(new_rows)


@dataclass
class JoinResult:
    """Star-join output: one row per surviving fact row, in fact-id order."""

    columns: list[str]
    rows: list[Row]
    fact_ids: list[int]


def star_columns(ds: Dataset) -> list[str]:
    """Column names of the joined star row, in canonical layout order."""
    cols = [m.name for m in ds.fact.measures]
    for fk in ds.fact.foreign_keys:
        dim = ds.dimension(fk.dimension)
        cols.extend(f"{dim.name}.{a.name}" for a in dim.attributes)
    return cols


def star_join(
    ds: Dataset,
    dim_filters: Optional[Mapping[str, Iterable[int]]] = None,
) -> JoinResult:
    """Join the fact table with all dimensions via key/foreign-key equality.

    ``dim_filters`` maps dimension names to sets of dimension row ordinals; a
    fact row survives only if every foreign key lands inside its dimension's
    filter set (absent filter = all rows pass). Output order is fact row-id
    order.
    """
    filters: dict[str, frozenset[int]] = {}
    if dim_filters:
        for name, ids in dim_filters.items():
            dim = ds.dimension(name)  # raises UnknownNameError
            filters[dim.name] = frozenset(ids)

    fact = ds.fact
    n_fk = len(fact.foreign_keys)
    plan = []
    for i, fk in enumerate(fact.foreign_keys):
        dim = ds.dimension(fk.dimension)
        plan.append((i, dim, filters.get(dim.name)))

    columns = star_columns(ds)
    rows: list[Row] = []
    fact_ids: list[int] = []
    for fid, frow in enumerate(fact.rows):
        joined_tail: list[Value] = []
        keep = True
        for i, dim, allowed in plan:
            ordinal = dim.key_index[frow[i]]
            if allowed is not None and ordinal not in allowed:
                keep = False
                break
            joined_tail.extend(dim.rows[ordinal])
        if not keep:
            continue
        rows.append(tuple(frow[n_fk:]) + tuple(joined_tail))
        fact_ids.append(fid)
    return JoinResult(columns=columns, rows=rows, fact_ids=fact_ids)

"""Per-user materialized views over the star warehouse.

Each dimension gets a vector of surviving row ordinals: no preferences keeps
everything, otherwise the conjunction of that dimension's preferences; if
the conjunction comes up empty, rows satisfying strictly more than half of
the preferences are taken instead (and the fallback is tagged so callers can
see it fired). The view is the star join restricted to those vectors, stored
either as full joined rows or as fact row identifiers only.
"""
from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Sequence

from .errors import UnknownNameError
from .preferences import (
    Preference,
    Profile,
    evaluate_predicate,
    normalize_profile,
)
from .warehouse import Dataset, DimensionTable, JoinResult, star_join


class VectorRule(Enum):
    NO_PREFS_ALL = "no_prefs_all"
    CONJUNCTION = "conjunction"
    MAJORITY_FALLBACK = "majority_fallback"


class ViewMode(Enum):
    FULL = "full"
    IDS = "ids"


@dataclass(frozen=True)
class DimensionVector:
    dimension: str
    ids: frozenset[int]
    # None on vectors rehydrated from disk; the envelope does not carry rules
    rule_applied: Optional[VectorRule]


@dataclass
class MaterializedView:
    owner: str
    mode: ViewMode
    dim_vectors: dict[str, DimensionVector]
    fact_ids: frozenset[int]
    profile_hash: str
    built_generation: int
    rows: Optional[JoinResult] = None  # FULL mode only
    stale: bool = False
    dataset: Optional[Dataset] = field(default=None, repr=False)
    build_seconds: float = 0.0

    @property
    def is_group(self) -> bool:
        return self.owner.startswith("group-")

    def is_stale(self, ds: Dataset) -> bool:
        return self.stale or self.built_generation < ds.ingest_generation


@dataclass(frozen=True)
class ViewStats:
    fact_rows_view: int
    fact_rows_total: int
    dimensions: dict[str, tuple[int, int]]  # name -> (kept, total)
    mode: ViewMode
    build_seconds: float


def dimension_vector(
    dim: DimensionTable, prefs: Sequence[Preference]
) -> DimensionVector:
    """Apply a dimension's preferences under the all-or-majority rule."""
    for p in prefs:
        if p.dimension.casefold() != dim.name.casefold():
            raise UnknownNameError(
                f"preference targets {p.dimension!r}, not dimension {dim.name!r}"
            )
    if not prefs:
        return DimensionVector(
            dimension=dim.name,
            ids=frozenset(range(len(dim.rows))),
            rule_applied=VectorRule.NO_PREFS_ALL,
        )

    satisfied_counts = []
    conjunction: set[int] = set()
    for ordinal, row in enumerate(dim.rows):
        hits = sum(1 for p in prefs if evaluate_predicate(p, dim, row))
        satisfied_counts.append(hits)
        if hits == len(prefs):
            conjunction.add(ordinal)

    if conjunction:
        return DimensionVector(
            dimension=dim.name,
            ids=frozenset(conjunction),
            rule_applied=VectorRule.CONJUNCTION,
        )
    majority = frozenset(
        ordinal
        for ordinal, hits in enumerate(satisfied_counts)
        if hits * 2 > len(prefs)
    )
    return DimensionVector(
        dimension=dim.name, ids=majority, rule_applied=VectorRule.MAJORITY_FALLBACK
    )


def group_preferences(
    ds: Dataset, prefs: Iterable[Preference]
) -> dict[str, list[Preference]]:
    """Bucket preferences by their (resolved) target dimension."""
    grouped: dict[str, list[Preference]] = {}
    for p in prefs:
        dim = ds.dimension(p.dimension)  # raises UnknownNameError
        grouped.setdefault(dim.name, []).append(p)
    return grouped


def build_view(ds: Dataset, profile: Profile, mode: ViewMode) -> MaterializedView:
    """Materialize a user's view of the warehouse.

    FULL keeps the joined rows (every dimension attribute, no projection);
    IDS keeps only the surviving fact row identifiers, resolving attributes
    through the base tables at query time.
    """
    started = time.perf_counter()
    by_dim = group_preferences(ds, profile.preferences)
    vectors = {
        name: dimension_vector(dim, by_dim.get(name, []))
        for name, dim in ds.dimensions.items()
    }

    rows: Optional[JoinResult] = None
    if mode is ViewMode.FULL:
        rows = star_join(ds, {name: v.ids for name, v in vectors.items()})
        fact_ids = frozenset(rows.fact_ids)
    else:
        fact = ds.fact
        plan = [
            (i, ds.dimension(fk.dimension).key_index, vectors[ds.dimension(fk.dimension).name].ids)
            for i, fk in enumerate(fact.foreign_keys)
        ]
        fact_ids = frozenset(
            fid
            for fid, frow in enumerate(fact.rows)
            if all(key_index[frow[i]] in allowed for i, key_index, allowed in plan)
        )

    return MaterializedView(
        owner=profile.user_id,
        mode=mode,
        dim_vectors=vectors,
        fact_ids=fact_ids,
        profile_hash=profile.profile_hash,
        built_generation=ds.ingest_generation,
        rows=rows,
        dataset=ds,
        build_seconds=time.perf_counter() - started,
    )


def group_profile(profiles: Sequence[Profile]) -> Profile:
    """Shared profile of a user group: the exact-triple intersection.

    Kept preferences take the minimum priority across members and are
    re-ranked densely. An empty intersection is a valid group profile whose
    view is the whole warehouse.
    """
    if not profiles:
        raise ValueError("group_profile needs at least one member profile")
    common = set(p.signature() for p in profiles[0].preferences)
    for member in profiles[1:]:
        common &= {p.signature() for p in member.preferences}

    min_priority: dict[str, int] = {}
    kept: dict[str, Preference] = {}
    for member in profiles:
        for p in member.preferences:
            sig = p.signature()
            if sig not in common:
                continue
            if sig not in kept:
                kept[sig] = p
            rank = p.priority if p.priority is not None else len(member.preferences)
            min_priority[sig] = min(min_priority.get(sig, rank), rank)

    # order by best rank across members, ties by first member's ordering
    first_order = {p.signature(): i for i, p in enumerate(profiles[0].preferences)}
    ordered = sorted(kept, key=lambda sig: (min_priority[sig], first_order[sig]))

    member_ids = sorted({p.user_id for p in profiles})
    digest = hashlib.sha256("|".join(member_ids).encode("utf-8")).hexdigest()[:12]
    prefs = [
        Preference(
            dimension=kept[sig].dimension,
            attribute=kept[sig].attribute,
            operator=kept[sig].operator,
            value=kept[sig].value,
        )
        for sig in ordered
    ]
    return normalize_profile(f"group-{digest}", prefs).profile


def view_stats(view: MaterializedView, ds: Dataset) -> ViewStats:
    dims = {
        name: (len(view.dim_vectors[name].ids), len(dim.rows))
        for name, dim in ds.dimensions.items()
    }
    return ViewStats(
        fact_rows_view=len(view.fact_ids),
        fact_rows_total=len(ds.fact.rows),
        dimensions=dims,
        mode=view.mode,
        build_seconds=view.build_seconds,
    )


# --- persistence envelope ----------------------------------------------------

def view_to_envelope(view: MaterializedView) -> dict:
    """JSON-safe envelope; FULL rows are re-derivable and never persisted."""
    return {
        "owner": view.owner,
        "mode": view.mode.value,
        "profile_hash": view.profile_hash,
        "built_generation": view.built_generation,
        "dim_vectors": {
            name: sorted(vec.ids) for name, vec in view.dim_vectors.items()
        },
        "fact_ids": sorted(view.fact_ids),
    }


def view_from_envelope(envelope: dict, ds: Dataset) -> MaterializedView:
    """Rehydrate a persisted view against the current dataset.

    FULL-mode rows are rebuilt from the stored vectors; if the warehouse has
    moved on since the build the view is already stale and queries will be
    refused before the rows could mislead anyone.
    """
    mode = ViewMode(envelope["mode"])
    vectors = {
        name: DimensionVector(dimension=name, ids=frozenset(ids), rule_applied=None)
        for name, ids in envelope["dim_vectors"].items()
    }
    rows = None
    if mode is ViewMode.FULL:
        rows = star_join(ds, {name: vec.ids for name, vec in vectors.items()})
    return MaterializedView(
        owner=envelope["owner"],
        mode=mode,
        dim_vectors=vectors,
        fact_ids=frozenset(envelope["fact_ids"]),
        profile_hash=envelope["profile_hash"],
        built_generation=envelope["built_generation"],
        rows=rows,
        dataset=ds,
        stale=bool(envelope.get("stale", False)),
    )

"""Personalized star-schema warehouse.

Users register hard preferences; the system materializes a per-user summary
view of the warehouse and answers their queries from it, treating the query's
own predicates as soft preferences layered on top.
"""
from __future__ import annotations

from .engine import AnsweredFrom, QueryResult, Session, evaluate, route
from .errors import (
    AuthenticationError,
    DuplicateUserError,
    IngestError,
    KindMismatchError,
    MissingEntryError,
    PreferenceSyntaxError,
    QuerySyntaxError,
    SchemaError,
    StaleViewError,
    UnknownNameError,
    ViewNotBuiltError,
    WarehouseError,
)
from .preferences import (
    ALL,
    Operator,
    Preference,
    Profile,
    effective_profile,
    evaluate_predicate,
    format_preference,
    normalize_profile,
    parse_preference,
)
from .query_language import Query, parse_query, print_query
from .views import (
    DimensionVector,
    MaterializedView,
    VectorRule,
    ViewMode,
    ViewStats,
    build_view,
    dimension_vector,
    group_profile,
    view_stats,
)
from .warehouse import (
    Dataset,
    DimensionTable,
    FactTable,
    ingest_dimension,
    ingest_fact,
    load_schema,
    star_join,
)

__version__ = "0.1.0"

__all__ = [
    "ALL",
    "AnsweredFrom",
    "AuthenticationError",
    "Dataset",
    "DimensionTable",
    "DimensionVector",
    "DuplicateUserError",
    "FactTable",
    "IngestError",
    "KindMismatchError",
    "MaterializedView",
    "MissingEntryError",
    "Operator",
    "Preference",
    "PreferenceSyntaxError",
    "Profile",
    "Query",
    "QueryResult",
    "QuerySyntaxError",
    "SchemaError",
    "Session",
    "StaleViewError",
    "UnknownNameError",
    "VectorRule",
    "ViewMode",
    "ViewNotBuiltError",
    "ViewStats",
    "WarehouseError",
    "build_view",
    "dimension_vector",
    "effective_profile",
    "evaluate",
    "evaluate_predicate",
    "format_preference",
    "group_profile",
    "ingest_dimension",
    "ingest_fact",
    "load_schema",
    "normalize_profile",
    "parse_preference",
    "parse_query",
    "print_query",
    "route",
    "star_join",
    "view_stats",
]

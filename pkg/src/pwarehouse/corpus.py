"""Random instance generation and golden-file regeneration.

The regression corpus is seed-driven: each case deterministically expands
into a small warehouse, a profile (possibly with ALL-valued or contradictory
preferences), a personalization degree, and a few queries. Golden files
store the oracle's answers as content digests (plus the two full motivating
answers), so `pw oracle-run` can regenerate them and the acceptance suite can
detect any drift byte-exactly.
"""
from __future__ import annotations

import csv
import hashlib
import io
import random
from dataclasses import dataclass
from datetime import date, timedelta
from pathlib import Path

from .engine import QueryResult
from .jsonio import canonical_dumps, write_json_atomic
from .oracle import oracle_evaluate
from .preferences import (
    ALL,
    Operator,
    Preference,
    Profile,
    effective_profile,
    normalize_profile,
)
from .query_language import parse_query
from .values import Kind
from .warehouse import Dataset, ingest_dimension, ingest_fact, load_schema

GENERATOR_VERSION = 1
DEFAULT_CASE_COUNT = 220

_TEXT_POOL = ["alpha", "beta", "gamma", "delta", "epsilon", "zeta"]
_OPERATORS = list(Operator)


@dataclass
class RandomInstance:
    seed: int
    dataset: Dataset
    profile: Profile
    warnings: list[str]
    degree: float
    query_texts: list[str]


def _csv_text(header: list[str], rows: list[list[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


_ATTR_POOL = [
    ("label", Kind.TEXT),
    ("size", Kind.INTEGER),
    ("score", Kind.DECIMAL),
    ("since", Kind.DATE),
    ("grade", Kind.TEXT),
]


def _random_value(rng: random.Random, kind: Kind) -> object:
    if kind is Kind.TEXT:
        return rng.choice(_TEXT_POOL)
    if kind is Kind.INTEGER:
        return rng.randint(0, 20)
    if kind is Kind.DECIMAL:
        return round(rng.uniform(0.0, 10.0), 2)
    return date(2020, 1, 1) + timedelta(days=rng.randint(0, 364))


def _cell(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, date):
        return value.isoformat()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def random_instance(seed: int) -> RandomInstance:
    """Expand a seed into a dataset, a profile, a degree, and query texts."""
    rng = random.Random(seed)
    n_dims = rng.randint(1, 5)

    dim_schemas = []
    for i in range(1, n_dims + 1):
        attrs = rng.sample(_ATTR_POOL, rng.randint(1, 3))
        dim_schemas.append((f"Dim{i}", attrs))

    schema_doc = {
        "fact": {
            "name": "Fact",
            "foreign_keys": [
                {"dimension": name, "column": f"{name.lower()}_id"}
                for name, _ in dim_schemas
            ],
            "measures": [
                {"name": "amount", "kind": "decimal"},
                {"name": "units", "kind": "integer"},
            ],
        },
        "dimensions": [
            {
                "name": name,
                "attributes": [{"name": "id", "kind": "integer", "role": "key"}]
                + [{"name": a, "kind": k.value, "role": "attribute"} for a, k in attrs],
            }
            for name, attrs in dim_schemas
        ],
    }
    ds = load_schema(canonical_dumps(schema_doc))

    dim_sizes = {}
    for name, attrs in dim_schemas:
        size = rng.randint(1, 50)
        dim_sizes[name] = size
        rows = []
        for key in range(1, size + 1):
            cells = [str(key)]
            for _attr, kind in attrs:
                if rng.random() < 0.06:
                    cells.append("")
                else:
                    cells.append(_cell(_random_value(rng, kind)))
            rows.append(cells)
        header = ["id"] + [a for a, _ in attrs]
        ingest_dimension(ds, name, _csv_text(header, rows))

    n_facts = rng.choice(
        [rng.randint(0, 60), rng.randint(60, 300), rng.randint(300, 1000)]
    )
    fact_rows = []
    for _ in range(n_facts):
        cells = [str(rng.randint(1, dim_sizes[name])) for name, _ in dim_schemas]
        cells.append(_cell(round(rng.uniform(0.0, 500.0), 2)))
        cells.append(str(rng.randint(0, 50)))
        fact_rows.append(cells)
    fact_header = [f"{name.lower()}_id" for name, _ in dim_schemas] + ["amount", "units"]
    ingest_fact(ds, _csv_text(fact_header, fact_rows))

    prefs = _random_preferences(rng, dim_schemas)
    profile, warnings = normalize_profile(f"user{seed}", prefs)
    degree = rng.choice([0.0, 0.5, 1.0])
    queries = _random_queries(rng, dim_schemas)
    return RandomInstance(
        seed=seed,
        dataset=ds,
        profile=profile,
        warnings=warnings,
        degree=degree,
        query_texts=queries,
    )


def _random_preferences(rng: random.Random, dim_schemas) -> list[Preference]:
    count = rng.randint(0, 6)
    prefs: list[Preference] = []
    while len(prefs) < count:
        dim_name, attrs = rng.choice(dim_schemas)
        attr_name, kind = rng.choice(attrs + [("id", Kind.INTEGER)])
        roll = rng.random()
        if roll < 0.12:
            prefs.append(
                Preference(dimension=dim_name, attribute=attr_name, operator=Operator.EQ, value=ALL)
            )
            continue
        op = rng.choice(_OPERATORS)
        value = _random_value(rng, kind)
        pref = Preference(dimension=dim_name, attribute=attr_name, operator=op, value=value)
        prefs.append(pref)
        # sometimes follow with an outright contradiction on the same attribute
        if len(prefs) < count and rng.random() < 0.18 and op in (Operator.GT, Operator.GTE):
            flipped = Operator.LT if op is Operator.GT else Operator.LTE
            low = _random_value(rng, kind)
            smaller = min(value, low) if not isinstance(value, str) else min(value, low)
            prefs.append(
                Preference(dimension=dim_name, attribute=attr_name, operator=flipped, value=smaller)
            )
    return prefs


def random_preference(rng: random.Random, ds: Dataset) -> Preference:
    """One random schema-valid preference against an existing dataset."""
    dim = rng.choice(list(ds.dimensions.values()))
    attr = rng.choice(dim.attributes)
    if rng.random() < 0.1:
        return Preference(
            dimension=dim.name, attribute=attr.name, operator=Operator.EQ, value=ALL
        )
    return Preference(
        dimension=dim.name,
        attribute=attr.name,
        operator=rng.choice(_OPERATORS),
        value=_random_value(rng, attr.kind),
    )


def _literal_text(value: object) -> str:
    if isinstance(value, str):
        return "'" + value.replace("'", "''") + "'"
    if isinstance(value, date):
        return value.isoformat()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _random_queries(rng: random.Random, dim_schemas) -> list[str]:
    texts = []
    dim_name, attrs = rng.choice(dim_schemas)
    texts.append(f"SELECT * FROM {dim_name}")

    attr_name, kind = rng.choice(attrs)
    op = rng.choice(_OPERATORS)
    texts.append(
        f"SELECT * FROM {dim_name} WHERE {attr_name} {op.symbol} "
        f"{_literal_text(_random_value(rng, kind))}"
    )

    star_options = []
    pred_dim, pred_attrs = rng.choice(dim_schemas)
    pa, pk = rng.choice(pred_attrs)
    pred = f"{pred_dim}.{pa} {rng.choice(_OPERATORS).symbol} {_literal_text(_random_value(rng, pk))}"
    star_options.append(f"SELECT * FROM Fact WHERE {pred}")
    star_options.append(f"SELECT * FROM Fact WHERE {pred} AND amount > 100.0")

    gdim, gattrs = rng.choice(dim_schemas)
    ga, _gk = rng.choice(gattrs)
    star_options.append(
        f"SELECT {gdim}.{ga}, sum(amount), count(units) FROM Fact GROUP BY {gdim}.{ga}"
    )
    star_options.append(
        "SELECT sum(amount), avg(amount), min(units), max(units) FROM Fact"
    )
    star_options.append(
        f"SELECT count(amount) FROM Fact WHERE units >= {rng.randint(0, 40)}"
    )
    texts.extend(rng.sample(star_options, 2))
    return texts


# --- golden files ------------------------------------------------------------

def result_digest(result: QueryResult) -> str:
    return hashlib.sha256(canonical_dumps(result.to_json()).encode("utf-8")).hexdigest()


def corpus_cases(count: int = DEFAULT_CASE_COUNT) -> list[RandomInstance]:
    return [random_instance(seed) for seed in range(count)]


def corpus_digests(count: int = DEFAULT_CASE_COUNT) -> dict:
    """Oracle answers for every (case, query), as content digests."""
    cases = {}
    for instance in corpus_cases(count):
        prefs = effective_profile(instance.profile, instance.degree)
        for qi, text in enumerate(instance.query_texts):
            q = parse_query(text, instance.dataset)
            result = oracle_evaluate(q, prefs, instance.dataset)
            cases[f"case{instance.seed:04d}q{qi}"] = result_digest(result)
    return {
        "generator_version": GENERATOR_VERSION,
        "count": count,
        "cases": cases,
    }


MOTIVATING_PREFERENCES = [
    "Car.year > 2007",
    "Car.price < 20000",
    "Car.color = 'black'",
    "Advertisement.region = 'Rhone-Alpes'",
]
MOTIVATING_WIDE_QUERY = "Select * From Car"
MOTIVATING_NARROW_QUERY = "select * from car where model='BMW'"


def motivating_profile(user_id: str = "decision-maker") -> Profile:
    from .preferences import parse_preference

    prefs = [parse_preference(text) for text in MOTIVATING_PREFERENCES]
    return normalize_profile(user_id, prefs).profile


def motivating_goldens(ds: Dataset) -> dict[str, dict]:
    """Oracle answers for the documented wide and narrow car queries."""
    profile = motivating_profile()
    out = {}
    for name, text in (
        ("motivating_wide", MOTIVATING_WIDE_QUERY),
        ("motivating_narrow", MOTIVATING_NARROW_QUERY),
    ):
        q = parse_query(text, ds)
        result = oracle_evaluate(q, profile, ds)
        out[name] = {
            "query": text,
            "profile": MOTIVATING_PREFERENCES,
            "result": result.to_json(),
        }
    return out


def write_goldens(golden_dir: Path, count: int = DEFAULT_CASE_COUNT) -> list[Path]:
    """Regenerate every golden file under ``golden_dir``; returns paths."""
    from .fixtures import cars_mini_dataset

    ds = cars_mini_dataset()
    written = []
    for name, payload in motivating_goldens(ds).items():
        path = golden_dir / f"{name}.json"
        write_json_atomic(path, payload)
        written.append(path)
    digest_path = golden_dir / "corpus_digests.json"
    write_json_atomic(digest_path, corpus_digests(count))
    written.append(digest_path)
    return written

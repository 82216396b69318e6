"""Packaged sample data: the cars-mini warehouse."""
from __future__ import annotations

from importlib import resources

from ..warehouse import Dataset, ingest_dimension, ingest_fact, load_schema

CARS_MINI_TABLES = ("Car", "Owner", "Advertisement")


def _read(name: str) -> str:
    return (
        resources.files(__package__).joinpath("cars_mini").joinpath(name).read_text("utf-8")
    )


def cars_mini_schema() -> str:
    return _read("schema.json")


def cars_mini_csv(table: str) -> str:
    return _read(f"{table}.csv")


def cars_mini_dataset() -> Dataset:
    """The 8-car, 12-sale fixture warehouse, fully ingested."""
    ds = load_schema(cars_mini_schema())
    for table in CARS_MINI_TABLES:
        ingest_dimension(ds, table, cars_mini_csv(table))
    ingest_fact(ds, cars_mini_csv("Sales"))
    return ds

"""Durable warehouse content: a schema file plus an append-only ingest log.

Layout under the data directory:

    warehouse/schema.json
    warehouse/ingests/00001-Car.csv, 00002-Sales.csv, ...

Restart replays the log in order, so the rebuilt dataset (row ids included)
and its ingest generation are identical to the pre-restart state.
"""
from __future__ import annotations

from pathlib import Path

from .errors import MissingEntryError
from .warehouse import Dataset, ingest_dimension, ingest_fact, load_schema


class WarehouseCatalog:
    def __init__(self, data_dir: Path):
        self.dir = Path(data_dir) / "warehouse"
        self.schema_path = self.dir / "schema.json"
        self.ingest_dir = self.dir / "ingests"

    def is_initialized(self) -> bool:
        return self.schema_path.exists()

    def initialize(self, schema_text: str) -> Dataset:
        load_schema(schema_text)  # validate before committing anything
        self.ingest_dir.mkdir(parents=True, exist_ok=True)
        self.schema_path.write_text(schema_text, encoding="utf-8")
        return load_schema(schema_text)

    def load(self) -> Dataset:
        if not self.is_initialized():
            raise MissingEntryError(
                f"warehouse not initialized under {self.dir}; run `pw init` first"
            )
        ds = load_schema(self.schema_path.read_text(encoding="utf-8"))
        for path in sorted(self.ingest_dir.glob("*.csv")):
            _, _, table = path.stem.partition("-")
            content = path.read_text(encoding="utf-8")
            if ds.is_fact(table):
                ingest_fact(ds, content)
            else:
                ingest_dimension(ds, table, content)
        return ds

    def record_ingest(self, table: str, csv_content: str) -> Path:
        """Append one applied ingest batch to the durable log."""
        self.ingest_dir.mkdir(parents=True, exist_ok=True)
        index = len(list(self.ingest_dir.glob("*.csv"))) + 1
        path = self.ingest_dir / f"{index:05d}-{table}.csv"
        path.write_text(csv_content, encoding="utf-8")
        return path

    def apply_ingest(self, ds: Dataset, table: str, csv_content: str) -> int:
        """Ingest into the live dataset, then record the batch durably."""
        if ds.is_fact(table):
            count = ingest_fact(ds, csv_content)
            table_name = ds.fact.name
        else:
            dim = ds.dimension(table)
            count = ingest_dimension(ds, dim.name, csv_content)
            table_name = dim.name
        self.record_ingest(table_name, csv_content)
        return count

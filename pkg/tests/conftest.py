from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from pwarehouse.corpus import motivating_profile
from pwarehouse.fixtures import (
    cars_mini_csv,
    cars_mini_dataset,
    cars_mini_schema,
)

GOLDEN_DIR = Path(__file__).parent / "golden"
REPO_ROOT = Path(__file__).parent.parent


@pytest.fixture
def cars():
    """A fresh cars-mini dataset (8 cars, 4 owners, 6 ads, 12 sales)."""
    return cars_mini_dataset()


@pytest.fixture
def car_profile():
    """The motivating profile: year>2007, price<20000, color='black',
    region='Rhone-Alpes'."""
    return motivating_profile()


@pytest.fixture
def schema_text():
    return cars_mini_schema()


@pytest.fixture
def csv_of():
    return cars_mini_csv


@pytest.fixture
def data_dir(tmp_path):
    """An initialized warehouse directory seeded with cars-mini."""
    from pwarehouse.catalog import WarehouseCatalog

    catalog = WarehouseCatalog(tmp_path)
    ds = catalog.initialize(cars_mini_schema())
    for table in ("Car", "Owner", "Advertisement"):
        catalog.apply_ingest(ds, table, cars_mini_csv(table))
    catalog.apply_ingest(ds, "Sales", cars_mini_csv("Sales"))
    return tmp_path

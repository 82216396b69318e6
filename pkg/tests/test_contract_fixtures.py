"""Server side of the UI contract: the recorded fixture bodies parse to the
documented shapes and the service accepts/produces them verbatim.

The matching byte-level assertions on the client side live in the frontend's
own test suite; these tests only need the committed fixture files, never a
frontend build.
"""
from __future__ import annotations

import json
from pathlib import Path

import pytest

from pwarehouse.corpus import motivating_profile
from pwarehouse.preferences import profile_from_json

FIXTURE_DIR = Path(__file__).parent.parent / "frontend" / "tests" / "fixtures"

pytestmark = pytest.mark.skipif(
    not FIXTURE_DIR.exists(), reason="frontend contract fixtures not present"
)


def _read(name: str) -> bytes:
    return (FIXTURE_DIR / name).read_bytes()


def test_profile_fixture_is_the_motivating_profile(cars):
    doc = json.loads(_read("profile_motivating.json"))
    normalized = profile_from_json(doc)
    assert normalized.profile.profile_hash == motivating_profile().profile_hash
    assert [p.priority for p in normalized.profile.preferences] == [1, 2, 3, 4]


def test_profile_fixture_round_trips_through_the_endpoint(data_dir):
    from fastapi.testclient import TestClient

    from pwarehouse.service import create_app

    app = create_app(data_dir)
    with TestClient(app) as client:
        client.post(
            "/api/v1/users", json={"user_id": "decision-maker", "passphrase": "pw"}
        )
        token = client.post(
            "/api/v1/sessions", json={"user_id": "decision-maker", "passphrase": "pw"}
        ).json()["token"]
        response = client.put(
            "/api/v1/users/decision-maker/profile",
            content=_read("profile_motivating.json"),
            headers={
                "Authorization": f"Bearer {token}",
                "Content-Type": "application/json",
            },
        )
        assert response.status_code == 200
        assert response.json()["profile_hash"] == motivating_profile().profile_hash


def test_personalization_bodies_are_valid_settings(data_dir):
    from fastapi.testclient import TestClient

    from pwarehouse.service import create_app

    entries = json.loads(_read("personalization_bodies.json"))
    assert {e["label"] for e in entries} >= {"toggle_off", "detent_2_of_4"}
    app = create_app(data_dir)
    with TestClient(app) as client:
        client.post("/api/v1/users", json={"user_id": "u", "passphrase": "pw"})
        token = client.post(
            "/api/v1/sessions", json={"user_id": "u", "passphrase": "pw"}
        ).json()["token"]
        for entry in entries:
            body = json.loads(entry["body"])
            assert set(body) == {"enabled", "degree"}
            assert isinstance(body["enabled"], bool)
            assert 0 <= body["degree"] <= 1
            response = client.put(
                "/api/v1/users/u/personalization",
                content=entry["body"],
                headers={
                    "Authorization": f"Bearer {token}",
                    "Content-Type": "application/json",
                },
            )
            assert response.status_code == 200, entry["label"]


def test_stale_response_fixture_matches_the_live_error_shape():
    doc = json.loads(_read("stale_view_response.json"))
    assert doc["code"] == "STALE_VIEW"
    assert "rebuild" in doc["detail"]["hint"]


def test_syntax_error_fixture_carries_position():
    doc = json.loads(_read("syntax_error_response.json"))
    assert doc["code"] == "SYNTAX_ERROR"
    assert doc["detail"]["position"] == 9


def test_wide_query_fixture_matches_the_golden_answer():
    from conftest import GOLDEN_DIR

    recorded = json.loads(_read("query_result_wide.json"))
    golden = json.loads((GOLDEN_DIR / "motivating_wide.json").read_text())
    assert recorded == golden["result"]

"""User registry, profile store, view store: auth flows and byte-stable files."""
from __future__ import annotations

import pytest

from pwarehouse.errors import (
    AuthenticationError,
    DuplicateUserError,
    KindMismatchError,
    MissingEntryError,
)
from pwarehouse.metadata import MetadataStore
from pwarehouse.preferences import normalize_profile, parse_preference
from pwarehouse.views import ViewMode, build_view

P = parse_preference


@pytest.fixture
def store(tmp_path):
    return MetadataStore(tmp_path)


class TestRegistration:
    def test_fresh_user_starts_as_beginner(self, store):
        record = store.register_user("alice", "s3cret")
        assert record.user_id == "alice"
        assert record.experienced is False
        assert "s3cret" not in record.credential.values()

    def test_duplicate_registration_fails(self, store):
        store.register_user("alice", "s3cret")
        with pytest.raises(DuplicateUserError):
            store.register_user("alice", "other")

    def test_empty_passphrase_fails(self, store):
        with pytest.raises(ValueError):
            store.register_user("alice", "")

    def test_hostile_user_id_fails(self, store):
        with pytest.raises(ValueError):
            store.register_user("../../etc/passwd", "x")


class TestAuthentication:
    def test_beginner_session_needs_onboarding(self, store):
        store.register_user("alice", "s3cret")
        session = store.authenticate("alice", "s3cret")
        assert session.needs_onboarding is True
        assert session.profile is None

    def test_wrong_passphrase_and_unknown_user_look_identical(self, store):
        store.register_user("alice", "s3cret")
        with pytest.raises(AuthenticationError) as wrong:
            store.authenticate("alice", "nope")
        with pytest.raises(AuthenticationError) as unknown:
            store.authenticate("bob", "nope")
        assert str(wrong.value) == str(unknown.value)

    def test_experienced_user_gets_view_bound_eagerly(self, store, cars):
        from pwarehouse.corpus import motivating_profile

        profile = motivating_profile("alice")
        store.register_user("alice", "s3cret")
        store.save_profile("alice", profile, cars)
        store.save_view(build_view(cars, profile, ViewMode.IDS))
        session = store.authenticate("alice", "s3cret", cars)
        assert session.needs_onboarding is False
        assert session.bound_view is not None
        assert session.bound_view.profile_hash == profile.profile_hash

    def test_profile_owner_must_match_user(self, store, cars, car_profile):
        store.register_user("alice", "s3cret")
        with pytest.raises(ValueError, match="belongs to"):
            store.save_profile("alice", car_profile, cars)


class TestProfileStore:
    def test_first_save_flips_experienced_and_reports_change(self, store, cars):
        from pwarehouse.corpus import motivating_profile

        store.register_user("alice", "s3cret")
        _, changed = store.save_profile("alice", motivating_profile("alice"), cars)
        assert changed is True
        assert store.user("alice").experienced is True

    def test_identical_resave_reports_no_change(self, store, cars):
        from pwarehouse.corpus import motivating_profile

        profile = motivating_profile("alice")
        store.register_user("alice", "s3cret")
        store.save_profile("alice", profile, cars)
        _, changed = store.save_profile("alice", profile, cars)
        assert changed is False

    def test_unknown_attribute_fails_kind_check_and_keeps_store(self, store, cars):
        store.register_user("alice", "s3cret")
        bad = normalize_profile("alice", [P("Car.wheels = 4")]).profile
        with pytest.raises(Exception):
            store.save_profile("alice", bad, cars)
        assert store.load_profile("alice") is None

    def test_kind_mismatch_fails(self, store, cars):
        store.register_user("alice", "s3cret")
        bad = normalize_profile("alice", [P("Car.year > 'black'")]).profile
        with pytest.raises(KindMismatchError):
            store.save_profile("alice", bad, cars)

    def test_save_for_missing_user_fails(self, store, cars, car_profile):
        with pytest.raises(MissingEntryError):
            store.save_profile("ghost", car_profile, cars)

    def test_round_trip_is_exact(self, store, cars):
        from pwarehouse.corpus import motivating_profile

        profile = motivating_profile("alice")
        store.register_user("alice", "s3cret")
        store.save_profile("alice", profile, cars)
        loaded = store.load_profile("alice")
        assert loaded.preferences == profile.preferences
        assert loaded.profile_hash == profile.profile_hash


class TestViewStore:
    def test_save_then_load_is_byte_identical(self, store, cars, car_profile):
        view = build_view(cars, car_profile, ViewMode.IDS)
        path = store.save_view(view)
        before = path.read_bytes()
        loaded = store.load_view("decision-maker", view.profile_hash, cars)
        assert loaded.fact_ids == view.fact_ids
        assert path.read_bytes() == before  # load never rewrites

    def test_load_missing_key_fails(self, store, cars):
        with pytest.raises(MissingEntryError):
            store.load_view("alice", "0" * 64, cars)

    def test_load_after_ingestion_is_stale(self, store, cars, car_profile):
        from pwarehouse.warehouse import ingest_dimension

        view = build_view(cars, car_profile, ViewMode.IDS)
        store.save_view(view)
        ingest_dimension(
            cars, "Owner", "owner_id,name,city,owner_type\n9,New,Lyon,private\n"
        )
        store.mark_stale(cars.ingest_generation)
        loaded = store.load_view("decision-maker", view.profile_hash, cars)
        assert loaded.stale is True

    def test_mark_stale_counts(self, store, cars, car_profile):
        assert store.mark_stale(99) == 0  # empty store
        for i in range(3):
            profile = normalize_profile(f"u{i}", [P(f"Car.year > {2000 + i}")]).profile
            store.save_view(build_view(cars, profile, ViewMode.IDS))
        assert store.mark_stale(cars.ingest_generation + 1) == 3
        fresh = normalize_profile("u9", [P("Car.year > 1990")]).profile
        view = build_view(cars, fresh, ViewMode.IDS)
        view.built_generation = cars.ingest_generation + 5
        store.save_view(view)
        assert store.mark_stale(cars.ingest_generation + 1) == 3  # newest survives

    def test_purge_views(self, store, cars, car_profile):
        store.save_view(build_view(cars, car_profile, ViewMode.IDS))
        other = normalize_profile("bob", [P("Car.year > 1999")]).profile
        store.save_view(build_view(cars, other, ViewMode.IDS))
        assert store.purge_views(owner="bob") == 1
        assert store.purge_views() == 1


class TestPersistenceRoundTrip:
    def test_reopen_reproduces_identical_bytes(self, tmp_path, cars):
        from pwarehouse.corpus import motivating_profile

        profile = motivating_profile("alice")
        store = MetadataStore(tmp_path)
        store.register_user("alice", "pw1")
        store.save_profile("alice", profile, cars)
        store.save_view(build_view(cars, profile, ViewMode.IDS))

        files = sorted(p for p in tmp_path.rglob("*.json"))
        before = {p: p.read_bytes() for p in files}

        reopened = MetadataStore(tmp_path)
        assert reopened.user("alice") is not None
        assert reopened.load_profile("alice").profile_hash == profile.profile_hash
        after = {p: p.read_bytes() for p in files}
        assert before == after

    def test_canonical_json_shape(self, tmp_path, cars):
        from pwarehouse.corpus import motivating_profile

        store = MetadataStore(tmp_path)
        store.register_user("alice", "pw1")
        store.save_profile("alice", motivating_profile("alice"), cars)
        for path in tmp_path.rglob("*.json"):
            text = path.read_text(encoding="utf-8")
            assert text.endswith("\n")
            import json

            doc = json.loads(text)
            from pwarehouse.jsonio import canonical_dumps

            assert canonical_dumps(doc) == text

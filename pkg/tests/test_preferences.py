"""Preference triples, parsing round-trips, profiles, degree prefixes."""
from __future__ import annotations

from datetime import date

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from pwarehouse.errors import KindMismatchError, PreferenceSyntaxError
from pwarehouse.preferences import (
    ALL,
    Operator,
    Preference,
    effective_profile,
    evaluate_predicate,
    format_preference,
    normalize_profile,
    parse_preference,
    preference_from_json,
    preference_to_json,
    profile_from_json,
    profile_to_json,
)


class TestParsePreference:
    def test_year_comparison(self):
        p = parse_preference("Car.year > 2007")
        assert (p.dimension, p.attribute, p.operator, p.value) == (
            "Car", "year", Operator.GT, 2007,
        )

    def test_quoted_text(self):
        p = parse_preference("Car.color = 'black'")
        assert p.operator is Operator.EQ
        assert p.value == "black"

    def test_all_keyword(self):
        p = parse_preference("Car.color = all")
        assert p.value is ALL
        assert p.is_all

    def test_all_requires_equality(self):
        with pytest.raises(PreferenceSyntaxError, match="all"):
            parse_preference("Car.color > all")

    def test_double_operator_is_malformed(self):
        with pytest.raises(PreferenceSyntaxError):
            parse_preference("Car.year >> 7")

    def test_date_literal(self):
        p = parse_preference("Advertisement.ad_date >= 2011-06-01")
        assert p.value == date(2011, 6, 1)

    def test_missing_dot_is_malformed(self):
        with pytest.raises(PreferenceSyntaxError):
            parse_preference("year > 2007")

    def test_quoted_all_is_text_not_token(self):
        p = parse_preference("Car.color = 'all'")
        assert p.value == "all"
        assert not p.is_all

    def test_every_operator_round_trips(self):
        for op in Operator:
            text = f"Car.year {op.symbol} 2007"
            assert format_preference(parse_preference(text)) == text


_ident = st.from_regex(r"[A-Za-z_][A-Za-z0-9_]{0,8}", fullmatch=True)
_text_value = st.text(
    alphabet=st.characters(min_codepoint=32, max_codepoint=0x2FF, blacklist_characters=""),
    max_size=12,
)
_value = st.one_of(
    st.integers(min_value=-(10**12), max_value=10**12),
    st.floats(allow_nan=False, allow_infinity=False, width=64),
    _text_value,
    st.dates(min_value=date(1, 1, 1), max_value=date(9999, 12, 31)),
)


class TestRoundTripProperty:
    @settings(max_examples=120, deadline=None)
    @given(dim=_ident, attr=_ident, op=st.sampled_from(list(Operator)), value=_value)
    def test_print_then_parse_is_identity(self, dim, attr, op, value):
        p = Preference(dimension=dim, attribute=attr, operator=op, value=value)
        again = parse_preference(format_preference(p))
        assert (again.dimension, again.attribute, again.operator) == (dim, attr, op)
        assert again.value == value and type(again.value) is type(value)

    @settings(max_examples=60, deadline=None)
    @given(dim=_ident, attr=_ident)
    def test_all_round_trips(self, dim, attr):
        p = Preference(dimension=dim, attribute=attr, operator=Operator.EQ, value=ALL)
        assert parse_preference(format_preference(p)).is_all

    @settings(max_examples=100, deadline=None)
    @given(dim=_ident, attr=_ident, op=st.sampled_from(list(Operator)), value=_value)
    def test_json_round_trip(self, dim, attr, op, value):
        p = Preference(dimension=dim, attribute=attr, operator=op, value=value, priority=1)
        again = preference_from_json(preference_to_json(p))
        assert again == p


class TestEvaluatePredicate:
    def test_year_gt_holds(self, cars):
        car = cars.dimensions["Car"]
        p = parse_preference("Car.year > 2007")
        assert evaluate_predicate(p, car, car.rows[0]) is True  # 2008
        assert evaluate_predicate(p, car, car.rows[2]) is False  # 2006

    def test_region_equality(self, cars):
        ad = cars.dimensions["Advertisement"]
        p = parse_preference("Advertisement.region = 'Rhone-Alpes'")
        assert evaluate_predicate(p, ad, ad.rows[0]) is True
        assert evaluate_predicate(p, ad, ad.rows[1]) is False

    def test_all_holds_for_every_row(self, cars):
        car = cars.dimensions["Car"]
        p = parse_preference("Car.color = all")
        assert all(evaluate_predicate(p, car, row) for row in car.rows)

    def test_null_never_satisfies(self, cars):
        car = cars.dimensions["Car"]
        row = list(car.rows[0])
        row[car.attribute_position("price")] = None
        p = parse_preference("Car.price < 20000")
        assert evaluate_predicate(p, car, tuple(row)) is False

    def test_all_holds_even_on_null(self, cars):
        car = cars.dimensions["Car"]
        row = tuple(None if i else v for i, v in enumerate(car.rows[0]))
        assert evaluate_predicate(parse_preference("Car.color = all"), car, row)

    def test_kind_mismatch_raises(self, cars):
        car = cars.dimensions["Car"]
        p = parse_preference("Car.year > 'text'")
        with pytest.raises(KindMismatchError):
            evaluate_predicate(p, car, car.rows[0])

    @settings(
        max_examples=80,
        deadline=None,
        suppress_health_check=[HealthCheck.function_scoped_fixture],
    )
    @given(
        year=st.one_of(st.none(), st.integers(-5000, 5000)),
        bound=st.integers(-5000, 5000),
        op=st.sampled_from(list(Operator)),
    )
    def test_total_on_kind_matching_inputs(self, cars, year, bound, op):
        """Never errors, always returns a boolean, on kind-matching rows.

        The fixture dataset is never mutated (the probed row is a copy), so
        sharing it across generated examples is safe.
        """
        car = cars.dimensions["Car"]
        row = list(car.rows[0])
        row[car.attribute_position("year")] = year
        p = Preference(dimension="Car", attribute="year", operator=op, value=bound)
        assert evaluate_predicate(p, car, tuple(row)) in (True, False)


class TestNormalizeProfile:
    def test_motivating_profile_assigns_priorities(self):
        prefs = [
            parse_preference("Car.year > 2007"),
            parse_preference("Car.price < 20000"),
            parse_preference("Car.color = 'black'"),
        ]
        profile, warnings = normalize_profile("u1", prefs)
        assert [p.priority for p in profile.preferences] == [1, 2, 3]
        assert warnings == []

    def test_duplicates_are_dropped(self):
        prefs = [parse_preference("Car.year > 2007")] * 2
        profile, _ = normalize_profile("u1", prefs)
        assert len(profile.preferences) == 1

    def test_contradiction_is_kept_but_warned(self):
        prefs = [
            parse_preference("Car.year > 2010"),
            parse_preference("Car.year < 2000"),
        ]
        profile, warnings = normalize_profile("u1", prefs)
        assert len(profile.preferences) == 2
        assert len(warnings) == 1
        assert "car.year" in warnings[0]

    def test_point_contradiction_via_neq(self):
        prefs = [
            parse_preference("Car.year >= 2010"),
            parse_preference("Car.year <= 2010"),
            parse_preference("Car.year != 2010"),
        ]
        _, warnings = normalize_profile("u1", prefs)
        assert len(warnings) == 1

    def test_satisfiable_range_has_no_warning(self):
        prefs = [
            parse_preference("Car.year > 2000"),
            parse_preference("Car.year < 2010"),
        ]
        _, warnings = normalize_profile("u1", prefs)
        assert warnings == []

    def test_hash_changes_iff_list_changes(self):
        a, _ = normalize_profile("u1", [parse_preference("Car.year > 2007")])
        b, _ = normalize_profile("u1", [parse_preference("Car.year > 2007")])
        c, _ = normalize_profile("u1", [parse_preference("Car.year > 2008")])
        assert a.profile_hash == b.profile_hash
        assert a.profile_hash != c.profile_hash

    def test_order_changes_the_hash(self):
        p1 = parse_preference("Car.year > 2007")
        p2 = parse_preference("Car.price < 20000")
        a, _ = normalize_profile("u1", [p1, p2])
        b, _ = normalize_profile("u1", [p2, p1])
        assert a.profile_hash != b.profile_hash

    def test_explicit_priorities_come_first(self):
        from dataclasses import replace

        p1 = parse_preference("Car.year > 2007")
        p2 = replace(parse_preference("Car.price < 20000"), priority=1)
        profile, _ = normalize_profile("u1", [p1, p2])
        assert profile.preferences[0].attribute == "price"
        assert [p.priority for p in profile.preferences] == [1, 2]

    @settings(max_examples=60, deadline=None)
    @given(
        ops=st.lists(st.sampled_from(list(Operator)), min_size=0, max_size=5),
        bounds=st.lists(st.integers(0, 50), min_size=5, max_size=5),
    )
    def test_normalization_is_idempotent(self, ops, bounds):
        prefs = [
            Preference(dimension="Car", attribute="year", operator=op, value=b)
            for op, b in zip(ops, bounds)
        ]
        first, _ = normalize_profile("u1", prefs)
        second, _ = normalize_profile("u1", list(first.preferences))
        assert second.profile_hash == first.profile_hash
        assert second.preferences == first.preferences


class TestEffectiveProfile:
    def _profile(self, k=3):
        prefs = [
            parse_preference(f"Car.year > {2000 + i}") for i in range(k)
        ]
        return normalize_profile("u1", prefs).profile

    def test_degree_one_is_everything(self):
        profile = self._profile(3)
        assert effective_profile(profile, 1.0) == list(profile.preferences)

    def test_degree_zero_is_empty(self):
        assert effective_profile(self._profile(3), 0.0) == []

    def test_degree_half_of_three_keeps_two(self):
        assert len(effective_profile(self._profile(3), 0.5)) == 2  # ceil(1.5)

    def test_out_of_range_degree_fails(self):
        with pytest.raises(ValueError):
            effective_profile(self._profile(3), 1.5)
        with pytest.raises(ValueError):
            effective_profile(self._profile(3), -0.1)

    @settings(max_examples=60, deadline=None)
    @given(
        k=st.integers(0, 6),
        d1=st.floats(0, 1, allow_nan=False),
        d2=st.floats(0, 1, allow_nan=False),
    )
    def test_lower_degree_is_a_prefix_of_higher(self, k, d1, d2):
        profile = self._profile(k) if k else normalize_profile("u1", []).profile
        lo, hi = sorted((d1, d2))
        shorter = effective_profile(profile, lo)
        longer = effective_profile(profile, hi)
        assert longer[: len(shorter)] == shorter


class TestProfileJson:
    def test_wire_format_shape(self, car_profile):
        doc = profile_to_json(car_profile)
        assert doc["user_id"] == car_profile.user_id
        first = doc["preferences"][0]
        assert set(first) == {"dimension", "attribute", "operator", "value", "priority"}

    def test_round_trip_preserves_hash(self, car_profile):
        again, _ = profile_from_json(profile_to_json(car_profile))
        assert again.profile_hash == car_profile.profile_hash
        assert again.preferences == car_profile.preferences

    def test_date_values_carry_kind_marker(self):
        p = parse_preference("Advertisement.ad_date >= 2011-06-01")
        doc = preference_to_json(p)
        assert doc == {
            "dimension": "Advertisement",
            "attribute": "ad_date",
            "operator": ">=",
            "value": "2011-06-01",
            "kind": "date",
        }

    def test_all_serializes_as_string(self):
        doc = preference_to_json(parse_preference("Car.color = all"))
        assert doc["value"] == "all"
        assert preference_from_json(doc).is_all

    def test_literal_text_all_survives(self):
        p = parse_preference("Car.color = 'all'")
        again = preference_from_json(preference_to_json(p))
        assert again.value == "all" and not again.is_all

"""Hard-preference triples and user profiles.

A preference is ``(Dimension.attribute, operator, value)`` with an optional
priority rank (1 = most important). The distinguished value ALL, legal only
with ``=``, means "everything on this attribute is fine" and always holds.
Profiles are immutable, deduplicated, priority-ordered preference lists
identified by a content hash; soft preferences are never stored here, they
only ever appear as query predicates.
"""
from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, NamedTuple, Optional, Sequence

from .errors import KindMismatchError, PreferenceSyntaxError
from .values import (
    Kind,
    Value,
    compare,
    compatible,
    family,
    format_literal,
    kind_of,
    parse_literal,
)
from .warehouse import DimensionTable, Row


class Operator(Enum):
    EQ = "="
    NEQ = "!="
    LT = "<"
    LTE = "<="
    GT = ">"
    GTE = ">="

    @property
    def symbol(self) -> str:
        return self.value

    @classmethod
    def from_symbol(cls, symbol: str) -> "Operator":
        try:
            return cls(symbol)
        except ValueError:
            raise PreferenceSyntaxError(f"unknown operator {symbol!r}") from None


class _AllValue:
    """Singleton token for the catch-all preference value."""

    _instance: Optional["_AllValue"] = None

    def __new__(cls) -> "_AllValue":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "ALL"


ALL = _AllValue()


@dataclass(frozen=True)
class Preference:
    dimension: str
    attribute: str
    operator: Operator
    value: Value | _AllValue
    priority: Optional[int] = None

    def __post_init__(self) -> None:
        if self.value is ALL and self.operator is not Operator.EQ:
            raise PreferenceSyntaxError("the value 'all' is only legal with '='")
        if self.priority is not None and self.priority < 1:
            raise ValueError("priority ranks start at 1")

    @property
    def is_all(self) -> bool:
        return self.value is ALL

    def signature(self) -> str:
        """Canonical identity: casefolded names, printed operator and value."""
        literal = "all" if self.is_all else format_literal(self.value)
        return (
            f"{self.dimension.casefold()}.{self.attribute.casefold()}"
            f"|{self.operator.symbol}|{literal}"
        )


@dataclass(frozen=True)
class Profile:
    user_id: str
    preferences: tuple[Preference, ...]
    profile_hash: str

    @property
    def is_group(self) -> bool:
        return self.user_id.startswith("group-")


_PREF_RE = re.compile(
    r"^\s*(?P<dim>[A-Za-z_]\w*)\s*\.\s*(?P<attr>[A-Za-z_]\w*)\s*"
    r"(?P<op>>=|<=|!=|=|<|>)\s*(?P<lit>.+?)\s*$",
    re.DOTALL,
)


def parse_preference(text: str) -> Preference:
    """Parse ``Dimension.attribute op literal`` where literal is a number,
    'quoted text', an ISO date, or the bare keyword ``all``."""
    m = _PREF_RE.match(text)
    if not m:
        raise PreferenceSyntaxError(f"not a preference: {text!r}")
    operator = Operator.from_symbol(m.group("op"))
    lit = m.group("lit")
    if lit.casefold() == "all":
        value: Value | _AllValue = ALL
    else:
        try:
            value = parse_literal(lit)
        except ValueError as exc:
            raise PreferenceSyntaxError(f"bad literal in {text!r}: {exc}") from None
    return Preference(
        dimension=m.group("dim"),
        attribute=m.group("attr"),
        operator=operator,
        value=value,
    )


def format_preference(p: Preference) -> str:
    literal = "all" if p.is_all else format_literal(p.value)
    return f"{p.dimension}.{p.attribute} {p.operator.symbol} {literal}"


def evaluate_predicate(p: Preference, dim: DimensionTable, row: Row) -> bool:
    """True iff the row's attribute stands in the preference's relation.

    ALL holds for every row (null included); otherwise a null attribute value
    never satisfies anything. Kind families must match or this raises.
    """
    pos = dim.attribute_position(p.attribute)
    if p.is_all:
        return True
    attr = dim.attributes[pos]
    if not compatible(attr.kind, kind_of(p.value)):
        raise KindMismatchError(
            f"{dim.name}.{attr.name} is {attr.kind.value}, "
            f"preference value {p.value!r} is {kind_of(p.value).value}"
        )
    return compare(p.operator.symbol, row[pos], p.value)


def _profile_hash(prefs: Sequence[Preference]) -> str:
    payload = "\n".join(p.signature() for p in prefs)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def _contradiction_warnings(prefs: Sequence[Preference]) -> list[str]:
    """Flag attribute groups whose conjunction is unsatisfiable.

    Dense-domain interval reasoning: intersect all bound constraints, then
    check whether a surviving single point is deleted by a != preference.
    ALL never constrains. Groups mixing value families are left to the
    kind-checker.
    """
    groups: dict[tuple[str, str, str], list[Preference]] = {}
    for p in prefs:
        if p.is_all:
            continue
        fam = family(kind_of(p.value))
        groups.setdefault(
            (p.dimension.casefold(), p.attribute.casefold(), fam), []
        ).append(p)

    warnings = []
    for (dim_fold, attr_fold, _fam), group in groups.items():
        if len(group) < 2:
            continue
        lower: tuple[Value, bool] | None = None  # (bound, inclusive)
        upper: tuple[Value, bool] | None = None
        excluded: set[Value] = set()
        for p in group:
            op, v = p.operator, p.value
            if op is Operator.NEQ:
                excluded.add(v)
                continue
            lo: tuple[Value, bool] | None = None
            hi: tuple[Value, bool] | None = None
            if op is Operator.EQ:
                lo = hi = (v, True)
            elif op is Operator.GT:
                lo = (v, False)
            elif op is Operator.GTE:
                lo = (v, True)
            elif op is Operator.LT:
                hi = (v, False)
            elif op is Operator.LTE:
                hi = (v, True)
            if lo is not None and (
                lower is None or lo[0] > lower[0] or (lo[0] == lower[0] and not lo[1])
            ):
                lower = lo
            if hi is not None and (
                upper is None or hi[0] < upper[0] or (hi[0] == upper[0] and not hi[1])
            ):
                upper = hi
        empty = False
        if lower is not None and upper is not None:
            if lower[0] > upper[0]:
                empty = True
            elif lower[0] == upper[0]:
                if not (lower[1] and upper[1]):
                    empty = True
                elif lower[0] in excluded:
                    empty = True
        if empty:
            involved = ", ".join(format_preference(p) for p in group)
            warnings.append(
                f"preferences on {dim_fold}.{attr_fold} cannot all hold: {involved}"
            )
    return warnings


class NormalizedProfile(NamedTuple):
    profile: Profile
    warnings: list[str]


def normalize_profile(user_id: str, prefs: Iterable[Preference]) -> NormalizedProfile:
    """Dedupe, rank, and hash a preference list into a Profile.

    Duplicates (same canonical signature) keep their first occurrence.
    Explicitly ranked preferences come first in rank order; the rest follow
    in entry order. Final priorities are dense 1..k. Contradictory
    preferences are retained (they legitimately empty a dimension vector)
    but reported as warnings.
    """
    deduped: list[Preference] = []
    seen: set[str] = set()
    for p in prefs:
        sig = p.signature()
        if sig in seen:
            continue
        seen.add(sig)
        deduped.append(p)

    ordered = sorted(
        range(len(deduped)),
        key=lambda i: (
            deduped[i].priority if deduped[i].priority is not None else math.inf,
            i,
        ),
    )
    ranked = tuple(
        replace(deduped[i], priority=rank)
        for rank, i in enumerate(ordered, start=1)
    )
    profile = Profile(
        user_id=user_id, preferences=ranked, profile_hash=_profile_hash(ranked)
    )
    return NormalizedProfile(profile, _contradiction_warnings(ranked))


def effective_profile(profile: Profile, degree: float) -> list[Preference]:
    """The first ceil(degree * k) preferences in priority order.

    Degree 0 turns personalization into the identity (empty list); degree 1
    applies the whole profile.
    """
    if not 0.0 <= degree <= 1.0:
        raise ValueError(f"degree must be within [0, 1], got {degree}")
    count = math.ceil(degree * len(profile.preferences))
    return list(profile.preferences[:count])


def effective_hash(profile: Profile, degree: float) -> str:
    """Content hash of the degree-limited prefix of a profile."""
    return _profile_hash(effective_profile(profile, degree))


# --- JSON wire format ------------------------------------------------------

def preference_to_json(p: Preference) -> dict:
    doc: dict = {
        "dimension": p.dimension,
        "attribute": p.attribute,
        "operator": p.operator.symbol,
    }
    if p.is_all:
        doc["value"] = "all"
    else:
        from datetime import date

        if isinstance(p.value, date):
            doc["value"] = p.value.isoformat()
            doc["kind"] = "date"
        else:
            doc["value"] = p.value
            # a text value spelled exactly "all" needs a marker to survive
            if p.value == "all":
                doc["kind"] = "text"
    if p.priority is not None:
        doc["priority"] = p.priority
    return doc


def preference_from_json(doc: dict) -> Preference:
    try:
        dimension = doc["dimension"]
        attribute = doc["attribute"]
        operator = Operator.from_symbol(doc["operator"])
        raw = doc["value"]
    except KeyError as exc:
        raise PreferenceSyntaxError(f"preference JSON missing {exc.args[0]!r}") from None
    kind_tag = doc.get("kind")
    value: Value | _AllValue
    if kind_tag == "date":
        from datetime import date

        value = date.fromisoformat(raw)
    elif kind_tag == "text":
        value = str(raw)
    elif raw == "all":
        value = ALL
    elif isinstance(raw, bool):
        raise PreferenceSyntaxError("boolean preference values are not supported")
    elif isinstance(raw, (int, float, str)):
        value = raw
    else:
        raise PreferenceSyntaxError(f"unsupported preference value {raw!r}")
    return Preference(
        dimension=dimension,
        attribute=attribute,
        operator=operator,
        value=value,
        priority=doc.get("priority"),
    )


def profile_to_json(profile: Profile) -> dict:
    return {
        "user_id": profile.user_id,
        "preferences": [preference_to_json(p) for p in profile.preferences],
    }


def profile_from_json(doc: dict) -> NormalizedProfile:
    """Decode and re-normalize; the hash is always recomputed, never trusted."""
    if not isinstance(doc, dict) or "user_id" not in doc:
        raise PreferenceSyntaxError("profile JSON needs 'user_id' and 'preferences'")
    raw_prefs = doc.get("preferences", [])
    if not isinstance(raw_prefs, list) or not all(
        isinstance(p, dict) for p in raw_prefs
    ):
        raise PreferenceSyntaxError("'preferences' must be a list of objects")
    prefs = [preference_from_json(p) for p in raw_prefs]
    return normalize_profile(doc["user_id"], prefs)

"""User registry, profile store, and view store, persisted as JSON files.

Layout under the data directory:

    users.json                  one record per registered user
    profiles/<user>.json        the user's current profile
    views/<owner>-<hash>.json   persisted view envelopes, kept as a cache
                                across profile edits (manual eviction)

All writes are canonical JSON via atomic rename, so close-and-reopen
reproduces identical bytes and a crash mid-write never corrupts prior state.
Staleness is derived: an envelope is stale when its built_generation trails
the store's current ingest generation.
"""
from __future__ import annotations

import hashlib
import re
import secrets
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from .engine import Session
from .errors import (
    AuthenticationError,
    DuplicateUserError,
    KindMismatchError,
    MissingEntryError,
)
from .jsonio import read_json, write_json_atomic
from .preferences import (
    Profile,
    effective_hash,
    profile_from_json,
    profile_to_json,
)
from .values import compatible, kind_of
from .views import MaterializedView, view_from_envelope, view_to_envelope
from .warehouse import Dataset

_IDENTIFIER_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_.-]*$")
_PBKDF2_ITERATIONS = 30_000


@dataclass
class UserRecord:
    user_id: str
    credential: dict  # salt/digest hex + iteration count
    created_at: str
    experienced: bool

    def to_json(self) -> dict:
        return {
            "user_id": self.user_id,
            "credential": self.credential,
            "created_at": self.created_at,
            "experienced": self.experienced,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "UserRecord":
        return cls(
            user_id=doc["user_id"],
            credential=doc["credential"],
            created_at=doc["created_at"],
            experienced=doc["experienced"],
        )


def _digest(passphrase: str, salt: bytes, iterations: int) -> str:
    return hashlib.pbkdf2_hmac(
        "sha256", passphrase.encode("utf-8"), salt, iterations
    ).hex()


def check_profile_schema(ds: Dataset, profile: Profile) -> None:
    """Kind-check every preference against the dataset schema."""
    for p in profile.preferences:
        dim = ds.dimension(p.dimension)
        attr = dim.attribute(p.attribute)
        if not p.is_all and not compatible(attr.kind, kind_of(p.value)):
            raise KindMismatchError(
                f"{dim.name}.{attr.name} is {attr.kind.value}, preference value "
                f"{p.value!r} is {kind_of(p.value).value}"
            )


class MetadataStore:
    """UA + UP DB + UPV DB over one data directory."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self.users_path = self.root / "users.json"
        self.profiles_dir = self.root / "profiles"
        self.views_dir = self.root / "views"
        self.current_generation = 0
        self._lock = threading.Lock()
        self._users: dict[str, UserRecord] = {}
        if self.users_path.exists():
            doc = read_json(self.users_path)
            self._users = {
                uid: UserRecord.from_json(rec) for uid, rec in doc.items()
            }

    # -- users ---------------------------------------------------------------

    def _persist_users(self) -> None:
        write_json_atomic(
            self.users_path, {uid: rec.to_json() for uid, rec in self._users.items()}
        )

    def register_user(self, user_id: str, passphrase: str) -> UserRecord:
        if not _IDENTIFIER_RE.match(user_id or ""):
            raise ValueError(f"invalid user id {user_id!r}")
        if not passphrase:
            raise ValueError("passphrase must not be empty")
        with self._lock:
            if user_id in self._users:
                raise DuplicateUserError(f"user {user_id!r} already exists")
            salt = secrets.token_bytes(16)
            record = UserRecord(
                user_id=user_id,
                credential={
                    "algorithm": "pbkdf2_sha256",
                    "salt": salt.hex(),
                    "digest": _digest(passphrase, salt, _PBKDF2_ITERATIONS),
                    "iterations": _PBKDF2_ITERATIONS,
                },
                created_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
                experienced=False,
            )
            self._users[user_id] = record
            self._persist_users()
            return record

    def user(self, user_id: str) -> Optional[UserRecord]:
        return self._users.get(user_id)

    def authenticate(
        self, user_id: str, passphrase: str, ds: Optional[Dataset] = None
    ) -> Session:
        """Verify credentials and open a session.

        Beginners (no profile saved yet) come back flagged for onboarding;
        experienced users get their stored view for the full profile bound
        eagerly when the dataset is at hand.
        """
        record = self._users.get(user_id)
        if record is None:
            raise AuthenticationError("invalid credentials")
        cred = record.credential
        digest = _digest(passphrase, bytes.fromhex(cred["salt"]), cred["iterations"])
        if not secrets.compare_digest(digest, cred["digest"]):
            raise AuthenticationError("invalid credentials")

        profile = self.load_profile(user_id)
        session = Session(
            user_id=user_id,
            personalization_enabled=True,
            degree=1.0,
            profile=profile,
            needs_onboarding=not record.experienced,
        )
        if ds is not None and profile is not None:
            wanted = effective_hash(profile, session.degree)
            if self.has_view(user_id, wanted):
                session.bound_view = self.load_view(user_id, wanted, ds)
        return session

    # -- profiles (UP DB) ------------------------------------------------------

    def _profile_path(self, user_id: str) -> Path:
        return self.profiles_dir / f"{user_id}.json"

    def load_profile(self, user_id: str) -> Optional[Profile]:
        path = self._profile_path(user_id)
        if not path.exists():
            return None
        return profile_from_json(read_json(path)).profile

    def save_profile(
        self, user_id: str, profile: Profile, ds: Dataset
    ) -> tuple[Profile, bool]:
        """Persist a profile; returns (profile, hash_changed).

        Fails the whole save on a schema kind-check error. Flips the user to
        experienced. Cached views for older hashes are retained.
        """
        record = self._users.get(user_id)
        if record is None:
            raise MissingEntryError(f"no such user {user_id!r}")
        if profile.user_id != user_id:
            raise ValueError(
                f"profile belongs to {profile.user_id!r}, not {user_id!r}"
            )
        check_profile_schema(ds, profile)
        previous = self.load_profile(user_id)
        changed = previous is None or previous.profile_hash != profile.profile_hash
        write_json_atomic(self._profile_path(user_id), profile_to_json(profile))
        if not record.experienced:
            record.experienced = True
            with self._lock:
                self._persist_users()
        return profile, changed

    # -- views (UPV DB) ---------------------------------------------------------

    def _view_path(self, owner: str, profile_hash: str) -> Path:
        return self.views_dir / f"{owner}-{profile_hash}.json"

    def save_view(self, view: MaterializedView) -> Path:
        path = self._view_path(view.owner, view.profile_hash)
        write_json_atomic(path, view_to_envelope(view))
        return path

    def has_view(self, owner: str, profile_hash: str) -> bool:
        return self._view_path(owner, profile_hash).exists()

    def load_envelope(self, owner: str, profile_hash: str) -> dict:
        path = self._view_path(owner, profile_hash)
        if not path.exists():
            raise MissingEntryError(f"no view stored for ({owner!r}, {profile_hash})")
        return read_json(path)

    def load_view(self, owner: str, profile_hash: str, ds: Dataset) -> MaterializedView:
        """Rehydrate a stored view; stale entries load fine but say so."""
        envelope = self.load_envelope(owner, profile_hash)
        view = view_from_envelope(envelope, ds)
        generation = max(self.current_generation, ds.ingest_generation)
        view.stale = view.built_generation < generation
        return view

    def iter_view_keys(self) -> list[tuple[str, str]]:
        if not self.views_dir.exists():
            return []
        keys = []
        for path in sorted(self.views_dir.glob("*.json")):
            owner, _, profile_hash = path.stem.rpartition("-")
            keys.append((owner, profile_hash))
        return keys

    def mark_stale(self, generation: int) -> int:
        """Record the warehouse generation; count entries now stale."""
        self.current_generation = max(self.current_generation, generation)
        count = 0
        for owner, profile_hash in self.iter_view_keys():
            envelope = self.load_envelope(owner, profile_hash)
            if envelope["built_generation"] < generation:
                count += 1
        return count

    def purge_views(self, owner: Optional[str] = None) -> int:
        count = 0
        for existing_owner, profile_hash in self.iter_view_keys():
            if owner is not None and existing_owner != owner:
                continue
            self._view_path(existing_owner, profile_hash).unlink()
            count += 1
        return count

"""HTTP front door: sessions, profiles, personalization, ingestion, queries.

The off-line/on-line split lives here: view builds run on a background
worker (single-flight per owner+profile hash, requests coalesce to one
ticket) while queries bind to finished views by atomic reference swap.
Ingestion takes the write side of a readers-writer lock so scans never see a
half-applied batch. Every error surfaces as the documented ApiError shape.
"""
from __future__ import annotations

import queue
import secrets
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from fastapi import Body, Depends, FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .catalog import WarehouseCatalog
from .engine import Session, route
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
from .metadata import MetadataStore
from .preferences import (
    Profile,
    effective_hash,
    effective_profile,
    normalize_profile,
    profile_from_json,
)
from .query_language import parse_query
from .views import MaterializedView, ViewMode, build_view, view_stats

API_PREFIX = "/api/v1"

_STATUS_BY_CODE = {
    "BAD_REQUEST": 400,
    "KIND_MISMATCH": 400,
    "SYNTAX_ERROR": 400,
    "UNAUTHENTICATED": 401,
    "NOT_FOUND": 404,
    "CONFLICT": 409,
    "STALE_VIEW": 409,
}


class ApiError(Exception):
    def __init__(self, code: str, message: str, detail: Optional[dict] = None):
        assert code in _STATUS_BY_CODE
        super().__init__(message)
        self.code = code
        self.message = message
        self.detail = detail or {}

    @property
    def status(self) -> int:
        return _STATUS_BY_CODE[self.code]

    def to_response(self) -> JSONResponse:
        return JSONResponse(
            status_code=self.status,
            content={"code": self.code, "message": self.message, "detail": self.detail},
        )


def _to_api_error(exc: Exception) -> ApiError:
    if isinstance(exc, ApiError):
        return exc
    if isinstance(exc, QuerySyntaxError):
        return ApiError("SYNTAX_ERROR", str(exc), {"position": exc.position})
    if isinstance(exc, PreferenceSyntaxError):
        return ApiError("SYNTAX_ERROR", str(exc))
    if isinstance(exc, KindMismatchError):
        return ApiError("KIND_MISMATCH", str(exc))
    if isinstance(exc, StaleViewError):
        return ApiError(
            "STALE_VIEW", str(exc), {"hint": "POST /api/v1/users/{id}/view/rebuild"}
        )
    if isinstance(exc, ViewNotBuiltError):
        return ApiError("STALE_VIEW", str(exc), {"reason": "view_not_built"})
    if isinstance(exc, AuthenticationError):
        return ApiError("UNAUTHENTICATED", str(exc))
    if isinstance(exc, DuplicateUserError):
        return ApiError("CONFLICT", str(exc))
    if isinstance(exc, MissingEntryError):
        return ApiError("NOT_FOUND", str(exc))
    if isinstance(exc, UnknownNameError):
        return ApiError("NOT_FOUND", str(exc))
    if isinstance(exc, IngestError):
        return ApiError("BAD_REQUEST", str(exc), {"row": exc.row})
    if isinstance(exc, (SchemaError, WarehouseError, ValueError)):
        return ApiError("BAD_REQUEST", str(exc))
    raise exc


class _ReadWriteLock:
    """Writer-preferring readers-writer lock; tiny and sufficient here."""

    def __init__(self) -> None:
        self._cond = threading.Condition()
        self._readers = 0
        self._writer = False
        self._writers_waiting = 0

    def acquire_read(self) -> None:
        with self._cond:
            while self._writer or self._writers_waiting:
                self._cond.wait()
            self._readers += 1

    def release_read(self) -> None:
        with self._cond:
            self._readers -= 1
            if self._readers == 0:
                self._cond.notify_all()

    def acquire_write(self) -> None:
        with self._cond:
            self._writers_waiting += 1
            while self._writer or self._readers:
                self._cond.wait()
            self._writers_waiting -= 1
            self._writer = True

    def release_write(self) -> None:
        with self._cond:
            self._writer = False
            self._cond.notify_all()

    class _Guard:
        def __init__(self, lock: "_ReadWriteLock", write: bool):
            self.lock, self.write = lock, write

        def __enter__(self):
            (self.lock.acquire_write if self.write else self.lock.acquire_read)()

        def __exit__(self, *exc):
            (self.lock.release_write if self.write else self.lock.release_read)()

    def reading(self) -> "_ReadWriteLock._Guard":
        return self._Guard(self, write=False)

    def writing(self) -> "_ReadWriteLock._Guard":
        return self._Guard(self, write=True)


@dataclass
class BuildTicket:
    ticket_id: str
    owner: str
    profile_hash: str
    status: str = "queued"  # queued | running | done | failed
    error: Optional[str] = None


@dataclass
class _BuildTask:
    owner: str
    profile: Profile
    ticket: BuildTicket


class ViewBuildWorker:
    """In-process off-line part: builds views one at a time, coalescing
    duplicate requests for the same (owner, profile hash)."""

    def __init__(self, state: "ServiceState"):
        self.state = state
        self.queue: "queue.Queue[_BuildTask]" = queue.Queue()
        self._lock = threading.Lock()
        self._in_flight: dict[tuple[str, str], BuildTicket] = {}
        self.tickets: dict[str, BuildTicket] = {}
        self._thread = threading.Thread(target=self._run, daemon=True)
        self._thread.start()

    def enqueue(self, owner: str, profile: Profile) -> tuple[BuildTicket, bool]:
        """Returns (ticket, coalesced)."""
        key = (owner, profile.profile_hash)
        with self._lock:
            existing = self._in_flight.get(key)
            if existing is not None:
                return existing, True
            ticket = BuildTicket(
                ticket_id=secrets.token_hex(8),
                owner=owner,
                profile_hash=profile.profile_hash,
            )
            self._in_flight[key] = ticket
            self.tickets[ticket.ticket_id] = ticket
        self.queue.put(_BuildTask(owner=owner, profile=profile, ticket=ticket))
        return ticket, False

    def _run(self) -> None:
        while True:
            task = self.queue.get()
            task.ticket.status = "running"
            try:
                with self.state.data_lock.reading():
                    view = build_view(
                        self.state.dataset, task.profile, self.state.view_mode
                    )
                    self.state.store.save_view(view)
                task.ticket.status = "done"
            except Exception as exc:  # surfaced via ticket status
                task.ticket.status = "failed"
                task.ticket.error = str(exc)
            finally:
                with self._lock:
                    self._in_flight.pop((task.owner, task.ticket.profile_hash), None)
                self.queue.task_done()

    def drain(self) -> None:
        """Block until every queued build has finished (tests, shutdown)."""
        self.queue.join()


class ServiceState:
    def __init__(self, data_dir: Path, view_mode: ViewMode = ViewMode.IDS):
        self.data_dir = Path(data_dir)
        self.catalog = WarehouseCatalog(self.data_dir)
        self.dataset = self.catalog.load()
        self.store = MetadataStore(self.data_dir)
        self.store.current_generation = self.dataset.ingest_generation
        self.view_mode = view_mode
        self.sessions: dict[str, Session] = {}
        self.data_lock = _ReadWriteLock()
        self.builder = ViewBuildWorker(self)

    # -- session plumbing ---------------------------------------------------

    def open_session(self, user_id: str, passphrase: str) -> Session:
        session = self.store.authenticate(user_id, passphrase, self.dataset)
        session.token = secrets.token_hex(16)
        self.sessions[session.token] = session
        return session

    def session_for(self, token: Optional[str]) -> Session:
        if not token or token not in self.sessions:
            raise AuthenticationError("missing or unknown session token")
        return self.sessions[token]

    def sessions_of(self, user_id: str) -> list[Session]:
        return [s for s in self.sessions.values() if s.user_id == user_id]

    # -- view binding ---------------------------------------------------------

    def resolve_binding(self, session: Session) -> Optional[MaterializedView]:
        """Bind the freshest stored view matching the effective profile, if any.

        Leaves a stale bound view in place (route reports STALE_VIEW with a
        rebuild hint) but replaces it the moment a fresh build lands.
        """
        if session.profile is None:
            session.bound_view = None
            return None
        wanted = effective_hash(session.profile, session.degree)
        bound = session.bound_view
        if bound is not None and bound.profile_hash == wanted and not bound.is_stale(self.dataset):
            return bound
        if self.store.has_view(session.user_id, wanted):
            candidate = self.store.load_view(session.user_id, wanted, self.dataset)
            if bound is None or bound.profile_hash != wanted or not candidate.stale:
                session.bound_view = candidate
        elif bound is not None and bound.profile_hash != wanted:
            session.bound_view = None
        return session.bound_view

    def effective_profile_of(self, session: Session) -> Profile:
        if session.profile is None:
            raise MissingEntryError(f"user {session.user_id!r} has no profile")
        prefs = effective_profile(session.profile, session.degree)
        return normalize_profile(session.user_id, prefs).profile


# -- request bodies -------------------------------------------------------------


class CredentialsBody(BaseModel):
    user_id: str
    passphrase: str


class PersonalizationBody(BaseModel):
    enabled: bool
    degree: float = 1.0


class QueryBody(BaseModel):
    text: str


class IngestBody(BaseModel):
    table: str
    csv: str


def _view_summary(state: ServiceState, view: MaterializedView) -> dict:
    return {
        "owner": view.owner,
        "mode": view.mode.value,
        "profile_hash": view.profile_hash,
        "fact_rows": len(view.fact_ids),
        "built_generation": view.built_generation,
        "stale": view.is_stale(state.dataset),
    }


def create_app(data_dir: Path, view_mode: ViewMode = ViewMode.IDS) -> FastAPI:
    state = ServiceState(data_dir, view_mode)
    app = FastAPI(title="pwarehouse", version="0.1.0")
    app.state.service = state

    def current_session(request: Request) -> Session:
        header = request.headers.get("authorization", "")
        token = header.removeprefix("Bearer ").strip() if header else None
        return state.session_for(token)

    @app.exception_handler(ApiError)
    async def handle_api_error(request: Request, exc: ApiError):
        return exc.to_response()

    @app.exception_handler(WarehouseError)
    async def handle_domain_error(request: Request, exc: WarehouseError):
        return _to_api_error(exc).to_response()

    @app.exception_handler(ValueError)
    async def handle_value_error(request: Request, exc: ValueError):
        return ApiError("BAD_REQUEST", str(exc)).to_response()

    @app.exception_handler(RequestValidationError)
    async def handle_validation_error(request: Request, exc: RequestValidationError):
        return ApiError(
            "BAD_REQUEST", "malformed request body", {"errors": exc.errors()[:5]}
        ).to_response()

    @app.get(API_PREFIX + "/schema")
    def get_schema():
        ds = state.dataset
        return {
            "fact": {
                "name": ds.fact.name,
                "foreign_keys": [
                    {"dimension": fk.dimension, "column": fk.column}
                    for fk in ds.fact.foreign_keys
                ],
                "measures": [
                    {"name": m.name, "kind": m.kind.value} for m in ds.fact.measures
                ],
            },
            "dimensions": [
                {
                    "name": dim.name,
                    "attributes": [
                        {"name": a.name, "kind": a.kind.value, "role": a.role}
                        for a in dim.attributes
                    ],
                }
                for dim in ds.dimensions.values()
            ],
        }

    @app.post(API_PREFIX + "/users", status_code=201)
    def register(body: CredentialsBody):
        record = state.store.register_user(body.user_id, body.passphrase)
        return {
            "user_id": record.user_id,
            "created_at": record.created_at,
            "experienced": record.experienced,
        }

    @app.post(API_PREFIX + "/sessions", status_code=201)
    def open_session(body: CredentialsBody):
        with state.data_lock.reading():
            session = state.open_session(body.user_id, body.passphrase)
        return {"token": session.token, "needs_onboarding": session.needs_onboarding}

    @app.put(API_PREFIX + "/users/{user_id}/profile")
    def put_profile(
        user_id: str,
        body: dict = Body(...),
        session: Session = Depends(current_session),
    ):
        if session.user_id != user_id:
            raise ApiError("UNAUTHENTICATED", "session does not belong to this user")
        if body.get("user_id") != user_id:
            raise ApiError("BAD_REQUEST", "profile user_id must match the path")
        normalized = profile_from_json(body)
        with state.data_lock.reading():
            try:
                profile, changed = state.store.save_profile(
                    user_id, normalized.profile, state.dataset
                )
            except UnknownNameError as exc:
                # schema binding failures on profile save are kind-check errors
                raise KindMismatchError(str(exc)) from None
            for s in state.sessions_of(user_id):
                s.profile = profile
                s.bound_view = None  # a superseded view must never answer again
            if changed:
                state.builder.enqueue(user_id, profile)
        return {
            "profile_hash": profile.profile_hash,
            "rebuild_enqueued": changed,
            "warnings": normalized.warnings,
        }

    @app.put(API_PREFIX + "/users/{user_id}/personalization")
    def put_personalization(
        user_id: str,
        body: PersonalizationBody,
        session: Session = Depends(current_session),
    ):
        if session.user_id != user_id:
            raise ApiError("UNAUTHENTICATED", "session does not belong to this user")
        if not 0.0 <= body.degree <= 1.0:
            raise ApiError("BAD_REQUEST", f"degree must be within [0, 1], got {body.degree}")
        session.personalization_enabled = body.enabled
        session.degree = body.degree
        view_info = None
        if body.enabled and session.profile is not None:
            effective = state.effective_profile_of(session)
            if effective.preferences:
                with state.data_lock.reading():
                    bound = state.resolve_binding(session)
                    if bound is not None and not bound.is_stale(state.dataset):
                        view_info = _view_summary(state, bound)
                    else:
                        state.builder.enqueue(user_id, effective)
        return {"enabled": body.enabled, "degree": body.degree, "view": view_info}

    @app.post(API_PREFIX + "/users/{user_id}/view/rebuild", status_code=202)
    def rebuild_view(user_id: str, session: Session = Depends(current_session)):
        if session.user_id != user_id:
            raise ApiError("UNAUTHENTICATED", "session does not belong to this user")
        effective = state.effective_profile_of(session)  # 404 when no profile
        ticket, coalesced = state.builder.enqueue(user_id, effective)
        return {
            "ticket": ticket.ticket_id,
            "coalesced": coalesced,
            "profile_hash": ticket.profile_hash,
        }

    @app.get(API_PREFIX + "/users/{user_id}/view/stats")
    def get_view_stats(user_id: str, session: Session = Depends(current_session)):
        if session.user_id != user_id:
            raise ApiError("UNAUTHENTICATED", "session does not belong to this user")
        with state.data_lock.reading():
            view = state.resolve_binding(session)
            if view is None:
                raise MissingEntryError("no view bound; build one first")
            stats = view_stats(view, state.dataset)
            return {
                "mode": stats.mode.value,
                "fact_rows_view": stats.fact_rows_view,
                "fact_rows_total": stats.fact_rows_total,
                "dimensions": {
                    name: {"kept": kept, "total": total}
                    for name, (kept, total) in stats.dimensions.items()
                },
                "build_seconds": stats.build_seconds,
                "profile_hash": view.profile_hash,
                "stale": view.is_stale(state.dataset),
            }

    @app.post(API_PREFIX + "/query")
    def post_query(body: QueryBody, session: Session = Depends(current_session)):
        with state.data_lock.reading():
            q = parse_query(body.text, state.dataset)
            if session.personalization_enabled and session.profile is not None:
                state.resolve_binding(session)
            result = route(q, session, state.dataset)
        return result.to_json()

    @app.post(API_PREFIX + "/admin/ingest")
    def admin_ingest(body: IngestBody, session: Session = Depends(current_session)):
        with state.data_lock.writing():
            count = state.catalog.apply_ingest(state.dataset, body.table, body.csv)
            flagged = state.store.mark_stale(state.dataset.ingest_generation)
        return {
            "table": body.table,
            "rows_ingested": count,
            "generation": state.dataset.ingest_generation,
            "views_stale": flagged,
        }

    return app

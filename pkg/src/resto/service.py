"""HTTP+JSON session service for the operator console and scripts.

One service process holds many sessions, each identified by a random
128-bit token. Mutating calls on a session (observations, retargeting) are
serialized behind a per-session lock; reads run freely between mutations.
With a state directory configured (argument or RESTO_STATE_DIR), every
mutation rewrites the session's snapshot atomically (temp file + rename),
and a restart replays every snapshot back into memory. A snapshot that
fails to replay is quarantined aside rather than taking the service down.

Every error response is the same envelope:
``{"error": {"code": ..., "message": ..., "path": ...}}``
with 400 for malformed requests, 404 for unknown sessions, 409 for
infeasible actions or observations, and 422 for schema violations.
"""

from __future__ import annotations

import json
import logging
import os
import secrets
import threading

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .errors import InfeasibleError, RestoError, SchemaError, UnknownBusError
from .mdp import mdp_stats
from .planner import (
    Observation,
    Session,
    apply_observation,
    load_snapshot,
    recommend,
    retarget,
    session_from_scenario,
    snapshot,
    what_if,
)
from .scenario import load_scenario

log = logging.getLogger("resto.service")

STATE_DIR_ENV = "RESTO_STATE_DIR"


def _error_response(status: int, code: str, message: str, path: str | None = None):
    body = {"code": code, "message": message}
    if path is not None:
        body["path"] = path
    return JSONResponse(status_code=status, content={"error": body})


def _status_for(exc: RestoError) -> int:
    if isinstance(exc, InfeasibleError):
        return 409
    if isinstance(exc, (SchemaError, UnknownBusError)):
        return 422
    return 400


class SessionStore:
    """In-memory session table with optional durable snapshots."""

    def __init__(self, state_dir: str | None = None):
        self.state_dir = state_dir
        self._sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._table_lock = threading.Lock()
        if state_dir:
            os.makedirs(state_dir, exist_ok=True)
            self._restore()

    def _restore(self) -> None:
        for fname in sorted(os.listdir(self.state_dir)):
            if not fname.endswith(".json"):
                continue
            path = os.path.join(self.state_dir, fname)
            sid = fname[: -len(".json")]
            try:
                with open(path, "r", encoding="utf-8") as fh:
                    doc = json.load(fh)
                sess = load_snapshot(doc)
            except (RestoError, ValueError, OSError, KeyError) as exc:
                quarantined = path + ".quarantined"
                os.replace(path, quarantined)
                log.error("quarantined corrupt session %s: %s", sid, exc)
                continue
            self._sessions[sid] = sess
            self._locks[sid] = threading.Lock()
        if self._sessions:
            log.info("restored %d session(s)", len(self._sessions))

    def create(self, sess: Session) -> str:
        sid = secrets.token_hex(16)
        with self._table_lock:
            self._sessions[sid] = sess
            self._locks[sid] = threading.Lock()
        self.persist(sid)
        return sid

    def get(self, sid: str) -> Session:
        try:
            return self._sessions[sid]
        except KeyError:
            raise KeyError(sid)

    def lock(self, sid: str) -> threading.Lock:
        return self._locks[sid]

    def replace(self, sid: str, sess: Session) -> None:
        self._sessions[sid] = sess

    def persist(self, sid: str) -> None:
        if not self.state_dir:
            return
        doc = snapshot(self._sessions[sid])
        path = os.path.join(self.state_dir, sid + ".json")
        tmp = path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)

    def __len__(self) -> int:
        return len(self._sessions)


def _session_body(sid: str, sess: Session) -> dict:
    act = recommend(sess)
    return {
        "id": sid,
        "name": sess.name,
        "state": sess.current_state,
        "value": sess.current_value,
        "recommendation": list(act) if act is not None else None,
        "terminal": sess.done,
        "target_bus": sess.target_bus,
        "history": [obs.as_dict() for obs in sess.history],
        "network": sess.network_doc,
        "p_f": list(sess.profile.p_f),
    }


def _parse_action_param(raw: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in raw.split(",") if part != "")
    except ValueError:
        raise SchemaError(f"bad action parameter {raw!r}", path="action")


def _parse_outcomes_param(raw: str) -> dict[int, str]:
    out: dict[int, str] = {}
    for item in raw.split(","):
        if not item:
            continue
        sep = "=" if "=" in item else ":"
        branch, _, status = item.partition(sep)
        try:
            out[int(branch)] = status
        except ValueError:
            raise SchemaError(f"bad outcomes item {item!r}", path="outcomes")
    if not out:
        raise SchemaError("no outcomes given", path="outcomes")
    return out


def create_app(state_dir: str | None = None) -> FastAPI:
    if state_dir is None:
        state_dir = os.environ.get(STATE_DIR_ENV) or None
    app = FastAPI(title="resto", docs_url=None, redoc_url=None, openapi_url=None)
    store = SessionStore(state_dir)
    app.state.store = store

    @app.exception_handler(RestoError)
    def _on_resto_error(request: Request, exc: RestoError):
        return _error_response(_status_for(exc), exc.code, exc.message, exc.path)

    @app.exception_handler(RequestValidationError)
    def _on_validation_error(request: Request, exc: RequestValidationError):
        first = exc.errors()[0] if exc.errors() else {}
        path = ".".join(str(p) for p in first.get("loc", ()) if p != "body")
        return _error_response(
            422, "schema_violation", first.get("msg", "invalid request"), path or None
        )

    @app.exception_handler(json.JSONDecodeError)
    def _on_bad_json(request: Request, exc: json.JSONDecodeError):
        return _error_response(400, "malformed_json", str(exc), None)

    def _get_session(sid: str) -> Session:
        try:
            return store.get(sid)
        except KeyError:
            raise _NoSuchSession(sid)

    class _NoSuchSession(Exception):
        def __init__(self, sid: str):
            self.sid = sid

    @app.exception_handler(_NoSuchSession)
    def _on_no_session(request: Request, exc: _NoSuchSession):
        return _error_response(
            404, "unknown_session", f"no session {exc.sid!r}", "session_id"
        )

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "sessions": len(store)}

    @app.post("/sessions", status_code=201)
    async def create_session(request: Request):
        try:
            doc = await request.json()
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            return _error_response(400, "malformed_json", str(exc), None)
        simplify = True
        if isinstance(doc, dict) and "simplify" in doc:
            simplify = bool(doc["simplify"])
        scn = load_scenario(doc)
        sess = session_from_scenario(scn, simplify=simplify)
        sid = store.create(sess)
        return _session_body(sid, sess)

    @app.get("/sessions/{sid}")
    def get_session(sid: str):
        return _session_body(sid, _get_session(sid))

    @app.post("/sessions/{sid}/observations")
    async def post_observation(sid: str, request: Request):
        sess = _get_session(sid)
        try:
            doc = await request.json()
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            return _error_response(400, "malformed_json", str(exc), None)
        obs = Observation.from_dict(doc)
        with store.lock(sid):
            apply_observation(sess, obs)
            store.persist(sid)
        return _session_body(sid, sess)

    @app.get("/sessions/{sid}/whatif")
    def get_whatif(sid: str, action: str, outcomes: str):
        sess = _get_session(sid)
        result = what_if(
            sess, _parse_action_param(action), _parse_outcomes_param(outcomes)
        )
        return {
            "successor": result.successor,
            "remaining": result.remaining,
            "next_action": (
                list(result.next_action) if result.next_action is not None else None
            ),
        }

    @app.post("/sessions/{sid}/retarget")
    async def post_retarget(sid: str, request: Request):
        sess = _get_session(sid)
        try:
            doc = await request.json()
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            return _error_response(400, "malformed_json", str(exc), None)
        if not isinstance(doc, dict) or "bus" not in doc:
            raise SchemaError("retarget body needs a bus field", path="bus")
        bus = doc["bus"]
        if bus is not None:
            bus = str(bus)
        with store.lock(sid):
            new_sess = retarget(sess, bus)
            store.replace(sid, new_sess)
            store.persist(sid)
        return _session_body(sid, new_sess)

    @app.get("/sessions/{sid}/mdp/stats")
    def get_stats(sid: str):
        sess = _get_session(sid)
        return {
            **mdp_stats(sess.mdp),
            "forbid_source_island_merge": sess.forbid_source_island_merge,
        }

    return app

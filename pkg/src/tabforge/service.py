"""HTTP layer: a small JSON API plus an optional static UI mount.

State model: the latest checkpoint of each session is loaded lazily into
memory; edits mutate the in-memory copy only, checkpoints persist it.
Handlers are plain sync functions (the framework runs them on a thread
pool), so a per-session lock serializes read-modify-write cycles.

Error contract: every domain error maps to {"error": {"code", "message",
...}} with a stable code string and status:

    bad_request              400
    forbidden_original_edit  403
    not_found                404
    type_violation           409
    revision_conflict        409
    lint_blocked             422
    storage_failure          500
"""

import io
import tempfile
import threading
import zipfile
from pathlib import Path

from fastapi import Body, FastAPI, Request
from fastapi.responses import HTMLResponse, JSONResponse, Response
from fastapi.staticfiles import StaticFiles

from .editor import apply_edit, command_from_dict
from .errors import (
    ForbiddenOriginalEdit,
    LintBlocked,
    MalformedJson,
    NotFound,
    RevisionConflict,
    StorageFailure,
    TabforgeError,
    TypeViolation,
)
from .export import export_dataset
from .grouping import CategoryMap, build_category_map
from .linting import ConstraintRule, lint_session
from .session import ALL_VARIANTS, session_to_object
from .store import SessionStore

EXPORT_ZIP_NAME = "export.zip"


def _error_code(exc: TabforgeError) -> tuple[str, int]:
    if isinstance(exc, ForbiddenOriginalEdit):
        return "forbidden_original_edit", 403
    if isinstance(exc, TypeViolation):
        return "type_violation", 409
    if isinstance(exc, RevisionConflict):
        return "revision_conflict", 409
    if isinstance(exc, NotFound):
        return "not_found", 404
    if isinstance(exc, LintBlocked):
        return "lint_blocked", 422
    if isinstance(exc, StorageFailure):
        return "storage_failure", 500
    return "bad_request", 400


def _error_payload(exc: TabforgeError) -> dict:
    code, _ = _error_code(exc)
    error: dict = {"code": code, "message": str(exc)}
    if isinstance(exc, TypeViolation):
        error.update(
            src_key=exc.src_key,
            dst_key=exc.dst_key,
            src_group=exc.src_group,
            dst_group=exc.dst_group,
        )
    elif isinstance(exc, RevisionConflict):
        error.update(expected=exc.expected, actual=exc.actual)
    elif isinstance(exc, LintBlocked):
        error["findings"] = list(exc.findings)
    return {"error": error}


def _rebuild_categories(store: SessionStore) -> CategoryMap:
    tables = []
    for sid in store.list_sessions():
        session = store.load(sid)
        tables.extend(session.table_for(v) for v in ALL_VARIANTS)
    return build_category_map(tables)


_INDEX_HTML = """<!doctype html>
<html><head><meta charset="utf-8"><title>tabforge</title></head>
<body><h1>tabforge</h1>
<p>No UI bundle is mounted. The JSON API lives under <code>/api</code>:</p>
<ul>
<li><a href="/api/sessions">/api/sessions</a></li>
<li>/api/sessions/{id}</li>
<li>/api/sessions/{id}/edits (POST)</li>
<li>/api/sessions/{id}/checkpoints (GET, POST)</li>
<li>/api/sessions/{id}/restore/{n} (POST)</li>
<li>/api/sessions/{id}/lint</li>
<li><a href="/api/export">/api/export</a></li>
</ul></body></html>
"""


def create_app(
    store: SessionStore,
    cmap: CategoryMap | None = None,
    rules: list[ConstraintRule] | None = None,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    """Wire the API around a store.

    The key -> type-group map is taken from the argument, else from
    categories.json in the store, else rebuilt by scanning every table
    in every session.
    """
    if cmap is None:
        cmap = store.load_categories()
    if cmap is None:
        cmap = _rebuild_categories(store)

    app = FastAPI(title="tabforge", docs_url=None, redoc_url=None)

    sessions = {}
    locks: dict[str, threading.Lock] = {}
    meta_lock = threading.Lock()

    def lock_for(session_id: str) -> threading.Lock:
        with meta_lock:
            return locks.setdefault(session_id, threading.Lock())

    def current(session_id: str):
        if session_id not in sessions:
            sessions[session_id] = store.load(session_id)
        return sessions[session_id]

    @app.exception_handler(TabforgeError)
    def domain_error(_request: Request, exc: TabforgeError):
        _, status = _error_code(exc)
        return JSONResponse(_error_payload(exc), status_code=status)

    @app.get("/api/sessions")
    def list_sessions():
        out = []
        for sid in store.list_sessions():
            with lock_for(sid):
                session = current(sid)
                out.append({"session_id": sid, "revision": session.revision})
        return {"sessions": out}

    @app.get("/api/sessions/{session_id}")
    def get_session(session_id: str):
        with lock_for(session_id):
            return session_to_object(current(session_id))

    @app.post("/api/sessions/{session_id}/edits")
    def post_edit(session_id: str, payload: dict = Body(...)):
        if not isinstance(payload, dict):
            raise MalformedJson("edit body must be a JSON object")
        body = dict(payload)
        expected = body.pop("expected_revision", None)
        if expected is not None and (not isinstance(expected, int) or isinstance(expected, bool)):
            raise MalformedJson('"expected_revision" must be an integer')
        command = command_from_dict(body)
        with lock_for(session_id):
            session = current(session_id)
            if expected is not None and expected != session.revision:
                raise RevisionConflict(expected, session.revision)
            successor = apply_edit(session, command, cmap)
            sessions[session_id] = successor
            return session_to_object(successor)

    @app.get("/api/sessions/{session_id}/checkpoints")
    def list_checkpoints(session_id: str):
        with lock_for(session_id):
            infos = store.checkpoints(session_id)
        return {"checkpoints": [info.to_dict() for info in infos]}

    @app.post("/api/sessions/{session_id}/checkpoints")
    def save_checkpoint(session_id: str, payload: dict | None = Body(None)):
        note = ""
        if payload is not None:
            if not isinstance(payload, dict) or not isinstance(payload.get("note", ""), str):
                raise MalformedJson('"note" must be a string')
            note = payload.get("note", "")
        with lock_for(session_id):
            session = current(session_id)
            number = store.save(session, note=note)
        return {"checkpoint": number}

    @app.post("/api/sessions/{session_id}/restore/{number}")
    def restore_checkpoint(session_id: str, number: int):
        with lock_for(session_id):
            session, new_number = store.restore(session_id, number)
            sessions[session_id] = session
            return {"checkpoint": new_number, "session": session_to_object(session)}

    @app.get("/api/sessions/{session_id}/lint")
    def lint(session_id: str):
        with lock_for(session_id):
            report = lint_session(current(session_id), rules)
        return report.to_dict()

    @app.get("/api/export")
    def export(force: bool = False):
        # persists nothing by itself: exports the newest saved checkpoints
        with tempfile.TemporaryDirectory() as tmp:
            bundle = export_dataset(store, tmp, rules=rules, force=force)
            buf = io.BytesIO()
            with zipfile.ZipFile(buf, "w", zipfile.ZIP_DEFLATED) as zf:
                for path in sorted(Path(tmp).rglob("*")):
                    if path.is_file():
                        zf.write(path, path.relative_to(tmp).as_posix())
        return Response(
            content=buf.getvalue(),
            media_type="application/zip",
            headers={
                "Content-Disposition": f'attachment; filename="{EXPORT_ZIP_NAME}"',
                "X-Pair-Count": str(bundle.n_pairs),
            },
        )

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    else:

        @app.get("/", include_in_schema=False)
        def index():
            return HTMLResponse(_INDEX_HTML)

    return app

"""Append-only on-disk checkpoint store.

Layout under the store root:

    categories.json                     key -> type group map (optional)
    sessions/<session_id>/manifest.json
    sessions/<session_id>/ckpt-<n>.json

Checkpoints are numbered from 1 and never overwritten; restoring an old
checkpoint appends a fresh copy rather than rewinding history. All
writes go through a temp file and an atomic rename so a crash can not
leave a half-written manifest or checkpoint behind.

The timestamp source is injectable so batch jobs can produce
byte-identical stores across reruns.
"""

import json
import os
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

from .errors import MalformedJson, NotFound, StorageFailure
from .grouping import CategoryMap
from .session import AnnotationSession, parse_session, serialize_session

CATEGORIES_FILE = "categories.json"
MANIFEST_FILE = "manifest.json"
EPOCH_ISO = "1970-01-01T00:00:00+00:00"


def utc_clock() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def epoch_clock() -> str:
    return EPOCH_ISO


@dataclass(frozen=True)
class CheckpointInfo:
    number: int
    saved_at: str
    note: str

    def to_dict(self) -> dict:
        return {"number": self.number, "saved_at": self.saved_at, "note": self.note}


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(f".{path.name}.tmp-{os.getpid()}")
    try:
        tmp.write_text(text, encoding="utf-8")
        os.replace(tmp, path)
    except OSError as exc:
        try:
            tmp.unlink(missing_ok=True)
        except OSError:
            pass
        raise StorageFailure(f"cannot write {path}: {exc}") from exc


class SessionStore:
    def __init__(self, root: str | Path, clock: Callable[[], str] = utc_clock):
        self.root = Path(root)
        self.clock = clock
        try:
            (self.root / "sessions").mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise StorageFailure(f"cannot create store at {self.root}: {exc}") from exc

    # --- paths ---------------------------------------------------------------

    def _session_dir(self, session_id: str) -> Path:
        return self.root / "sessions" / session_id

    def _ckpt_path(self, session_id: str, number: int) -> Path:
        return self._session_dir(session_id) / f"ckpt-{number}.json"

    # --- manifests -----------------------------------------------------------

    def _read_manifest(self, session_id: str) -> dict:
        path = self._session_dir(session_id) / MANIFEST_FILE
        if not path.exists():
            raise NotFound(f"no session {session_id!r} in store")
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise StorageFailure(f"cannot read manifest for {session_id!r}: {exc}") from exc
        if not isinstance(raw, dict) or "checkpoints" not in raw:
            raise StorageFailure(f"manifest for {session_id!r} is malformed")
        return raw

    def _write_manifest(self, session_id: str, manifest: dict) -> None:
        path = self._session_dir(session_id) / MANIFEST_FILE
        _atomic_write(path, json.dumps(manifest, ensure_ascii=False, indent=2) + "\n")

    # --- queries -------------------------------------------------------------

    def list_sessions(self) -> list[str]:
        base = self.root / "sessions"
        if not base.is_dir():
            return []
        return sorted(
            p.name for p in base.iterdir() if (p / MANIFEST_FILE).is_file()
        )

    def exists(self, session_id: str) -> bool:
        return (self._session_dir(session_id) / MANIFEST_FILE).is_file()

    def checkpoints(self, session_id: str) -> list[CheckpointInfo]:
        manifest = self._read_manifest(session_id)
        return [
            CheckpointInfo(c["number"], c["saved_at"], c.get("note", ""))
            for c in manifest["checkpoints"]
        ]

    def latest_checkpoint(self, session_id: str) -> int:
        manifest = self._read_manifest(session_id)
        if not manifest["checkpoints"]:
            raise NotFound(f"session {session_id!r} has no checkpoints")
        return manifest["checkpoints"][-1]["number"]

    # --- save / load / restore ------------------------------------------------

    def save(self, session: AnnotationSession, note: str = "") -> int:
        """Append the session as the next checkpoint and return its number."""
        sdir = self._session_dir(session.session_id)
        try:
            sdir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise StorageFailure(f"cannot create {sdir}: {exc}") from exc
        if (sdir / MANIFEST_FILE).is_file():
            manifest = self._read_manifest(session.session_id)
        else:
            manifest = {"session_id": session.session_id, "checkpoints": []}
        number = 1
        if manifest["checkpoints"]:
            number = manifest["checkpoints"][-1]["number"] + 1
        # checkpoint first, manifest second: a stray ckpt file without a
        # manifest entry is invisible; the reverse would dangle
        _atomic_write(self._ckpt_path(session.session_id, number), serialize_session(session))
        manifest["checkpoints"].append(
            {"number": number, "saved_at": self.clock(), "note": note}
        )
        self._write_manifest(session.session_id, manifest)
        return number

    def load(self, session_id: str, number: int | None = None) -> AnnotationSession:
        if number is None:
            number = self.latest_checkpoint(session_id)
        else:
            known = {c.number for c in self.checkpoints(session_id)}
            if number not in known:
                raise NotFound(f"session {session_id!r} has no checkpoint {number}")
        path = self._ckpt_path(session_id, number)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise StorageFailure(f"cannot read {path}: {exc}") from exc
        try:
            return parse_session(text)
        except MalformedJson as exc:
            raise StorageFailure(f"checkpoint {path} is corrupt: {exc}") from exc

    def restore(self, session_id: str, number: int) -> tuple[AnnotationSession, int]:
        """Re-append checkpoint ``number`` as the new latest; history is kept."""
        session = self.load(session_id, number)
        new_number = self.save(session, note=f"restore of checkpoint {number}")
        return session, new_number

    # --- type-group map --------------------------------------------------------

    def save_categories(self, cmap: CategoryMap) -> None:
        path = self.root / CATEGORIES_FILE
        _atomic_write(
            path, json.dumps(cmap.to_dict(), ensure_ascii=False, indent=2, sort_keys=True) + "\n"
        )

    def load_categories(self) -> CategoryMap | None:
        path = self.root / CATEGORIES_FILE
        if not path.is_file():
            return None
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise StorageFailure(f"cannot read {path}: {exc}") from exc
        return CategoryMap.from_dict(raw)

"""Dataset export and re-import.

``export_dataset`` freezes the latest checkpoint of every session into a
distribution bundle:

    <out>/manifest.json     session ids, table ids, pair count
    <out>/tables/<id>.json  one file per table, extended format
    <out>/pairs.tsv         one row per (table, hypothesis) pair
    <out>/metadata.tsv      one row per table

Nothing in the bundle carries a timestamp and everything is emitted in
sorted session order, so export -> import -> export reproduces the
first bundle byte for byte. Sessions with lint violations block the
export unless forced.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import LintBlocked, MalformedJson, MissingField, StorageFailure
from .linting import ConstraintRule, lint_session
from .session import (
    ALL_VARIANTS,
    COUNTERFACTUAL_VARIANTS,
    AnnotationSession,
    pair_id_for,
)
from .store import SessionStore
from .tablejson import (
    hypothesis_tsv_row,
    parse_table,
    read_hypotheses_tsv,
    serialize_table,
    write_hypotheses_tsv,
)
from .types import Hypothesis

BUNDLE_MANIFEST = "manifest.json"
TABLES_DIR = "tables"
PAIRS_FILE = "pairs.tsv"
METADATA_FILE = "metadata.tsv"

METADATA_COLUMNS = ("table_id", "session_id", "variant", "category", "n_hypotheses")


@dataclass
class ExportBundle:
    out_dir: Path
    session_ids: list[str] = field(default_factory=list)
    table_ids: list[str] = field(default_factory=list)
    n_pairs: int = 0


def _pair_rows(session: AnnotationSession) -> list[str]:
    rows = []
    for variant in ALL_VARIANTS:
        table = session.table_for(variant)
        for i, hyp in enumerate(session.hypotheses[variant], start=1):
            rows.append(
                hypothesis_tsv_row(
                    pair_id_for(session.session_id, variant, i),
                    table.table_id,
                    variant,
                    hyp,
                )
            )
    return rows


def export_dataset(
    store: SessionStore,
    out_dir: str | Path,
    rules: list[ConstraintRule] | None = None,
    force: bool = False,
) -> ExportBundle:
    """Write the distribution bundle for every session in the store."""
    out = Path(out_dir)
    session_ids = store.list_sessions()
    sessions = {sid: store.load(sid) for sid in session_ids}

    blockers = []
    for sid in session_ids:
        report = lint_session(sessions[sid], rules)
        blockers.extend((sid, entry) for entry in report.violations)
    if blockers and not force:
        findings = [f"{sid}: [{e.variant}] {e.message}" for sid, e in blockers]
        raise LintBlocked(
            f"{len(blockers)} lint violation(s) across {len({s for s, _ in blockers})} "
            "session(s); re-run with force to export anyway",
            findings,
        )

    try:
        (out / TABLES_DIR).mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise StorageFailure(f"cannot create {out}: {exc}") from exc

    bundle = ExportBundle(out_dir=out, session_ids=session_ids)
    pair_rows = []
    metadata_rows = []
    for sid in session_ids:
        session = sessions[sid]
        for variant in ALL_VARIANTS:
            table = session.table_for(variant)
            bundle.table_ids.append(table.table_id)
            path = out / TABLES_DIR / f"{table.table_id}.json"
            try:
                path.write_text(serialize_table(table), encoding="utf-8")
            except OSError as exc:
                raise StorageFailure(f"cannot write {path}: {exc}") from exc
            metadata_rows.append(
                (
                    table.table_id,
                    sid,
                    variant,
                    table.category,
                    str(len(session.hypotheses[variant])),
                )
            )
        pair_rows.extend(_pair_rows(session))

    bundle.n_pairs = len(pair_rows)
    try:
        (out / PAIRS_FILE).write_text(write_hypotheses_tsv(pair_rows), encoding="utf-8")
    except OSError as exc:
        raise StorageFailure(f"cannot write {out / PAIRS_FILE}: {exc}") from exc
    lines = ["\t".join(METADATA_COLUMNS)]
    lines.extend("\t".join(row) for row in metadata_rows)
    try:
        (out / METADATA_FILE).write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as exc:
        raise StorageFailure(f"cannot write {out / METADATA_FILE}: {exc}") from exc

    manifest = {
        "sessions": session_ids,
        "tables": sorted(bundle.table_ids),
        "n_pairs": bundle.n_pairs,
    }
    try:
        (out / BUNDLE_MANIFEST).write_text(
            json.dumps(manifest, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
        )
    except OSError as exc:
        raise StorageFailure(f"cannot write {out / BUNDLE_MANIFEST}: {exc}") from exc
    return bundle


def import_bundle(bundle_dir: str | Path) -> dict[str, AnnotationSession]:
    """Rebuild sessions from a bundle produced by ``export_dataset``.

    Hypothesis ids are regenerated positionally (h1, h2, ...), which is
    exactly what the pair ids in the bundle encode.
    """
    base = Path(bundle_dir)
    manifest_path = base / BUNDLE_MANIFEST
    if not manifest_path.is_file():
        raise MalformedJson(f"no {BUNDLE_MANIFEST} in {base}")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise MalformedJson(f"cannot read bundle manifest: {exc}") from exc
    if not isinstance(manifest, dict) or "sessions" not in manifest:
        raise MissingField("sessions")

    pairs_path = base / PAIRS_FILE
    if not pairs_path.is_file():
        raise MalformedJson(f"no {PAIRS_FILE} in {base}")
    rows = read_hypotheses_tsv(pairs_path.read_text(encoding="utf-8"))
    by_pair: dict[str, Hypothesis] = {}
    for row in rows:
        by_pair[row["pair_id"]] = row["hypothesis"]

    def load_table(table_id: str):
        path = base / TABLES_DIR / f"{table_id}.json"
        if not path.is_file():
            raise MalformedJson(f"bundle table missing: {path.name}")
        return parse_table(path.read_text(encoding="utf-8"), table_id=table_id)

    def hyps_for(session_id: str, variant: str) -> list[Hypothesis]:
        out = []
        index = 1
        while True:
            pid = pair_id_for(session_id, variant, index)
            if pid not in by_pair:
                break
            hyp = by_pair[pid]
            hyp.hyp_id = f"h{index}"
            out.append(hyp)
            index += 1
        return out

    sessions = {}
    for sid in manifest["sessions"]:
        original = load_table(sid)
        counterfactuals = {v: load_table(f"{sid}_{v}") for v in COUNTERFACTUAL_VARIANTS}
        hypotheses = {v: hyps_for(sid, v) for v in ALL_VARIANTS}
        session = AnnotationSession(
            session_id=sid,
            original=original,
            counterfactuals=counterfactuals,
            hypotheses=hypotheses,
            revision=0,
        )
        session.validate()
        sessions[sid] = session
    return sessions

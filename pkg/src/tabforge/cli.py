"""Command line entry points.

Exit codes: 0 on success, 1 when the run surfaced domain findings (lint
violations, blocked exports, unjoinable predictions), 2 for unusable
invocations or unreadable inputs.

The TABFORGE_STORE environment variable, when set, wins over any
--store-dir flag; `init` writes wherever --out points regardless.
"""

import argparse
import json
import os
import sys
from pathlib import Path

from .analysis import (
    dataset_stats,
    provenance_effect,
    read_predictions,
    render_effect_csv,
    render_effect_table,
    render_stats,
    strategy_effect,
    variant_effect,
)
from .errors import (
    EmptySelection,
    JoinFailure,
    LintBlocked,
    StorageFailure,
    TabforgeError,
)
from .export import export_dataset, import_bundle
from .grouping import build_category_map
from .initializer import init_session, load_corpus, load_policy
from .linting import lint_session, load_rules
from .pool import build_value_pool
from .session import ORIGINAL_VARIANT
from .store import SessionStore, epoch_clock
from .tablejson import read_hypotheses_tsv
from .types import DatasetTag, Hypothesis

STORE_ENV = "TABFORGE_STORE"

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_USAGE = 2


def _resolve_store_dir(flag_value: str | None) -> str:
    env = os.environ.get(STORE_ENV)
    if env:
        return env
    if flag_value:
        return flag_value
    print(
        f"error: no store directory (pass --store-dir or set {STORE_ENV})",
        file=sys.stderr,
    )
    raise SystemExit(EXIT_USAGE)


def _load_rules_arg(path: str | None):
    return load_rules(path) if path else None


# --- init ----------------------------------------------------------------------


def _read_seed_hypotheses(path: str) -> dict[str, list[Hypothesis]]:
    """Group TSV hypothesis rows by table id, re-identified as h1, h2, ..."""
    rows = read_hypotheses_tsv(Path(path).read_text(encoding="utf-8"))
    grouped: dict[str, list[Hypothesis]] = {}
    for row in rows:
        hyps = grouped.setdefault(row["table_id"], [])
        hyp = row["hypothesis"]
        hyp.hyp_id = f"h{len(hyps) + 1}"
        hyps.append(hyp)
    return grouped


def _cmd_init(args) -> int:
    corpus = load_corpus(args.corpus)
    policy = load_policy(args.policy, seed_override=args.seed)
    pool = build_value_pool(corpus)
    cmap = build_category_map([table for table, _ in corpus])
    seed_hyps = _read_seed_hypotheses(args.hypotheses)

    # the fixed clock makes rerunning init byte-identical
    store = SessionStore(args.out, clock=epoch_clock)
    store.save_categories(cmap)

    created = 0
    skipped = 0
    for table, tag in corpus:
        if tag is not DatasetTag.TEST:
            continue
        hyps = seed_hyps.get(table.table_id)
        if not hyps:
            skipped += 1
            continue
        session = init_session(table, hyps, pool, cmap, policy)
        store.save(session, note="initialized")
        created += 1

    print(f"initialized {created} session(s) in {args.out}")
    if skipped:
        print(f"skipped {skipped} test table(s) without seed hypotheses")
    return EXIT_OK


# --- serve ---------------------------------------------------------------------


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    store = SessionStore(_resolve_store_dir(args.store_dir))
    app = create_app(store, rules=_load_rules_arg(args.rules_file), ui_dir=args.ui_dir)
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


# --- lint ----------------------------------------------------------------------


def _cmd_lint(args) -> int:
    store = SessionStore(_resolve_store_dir(args.store_dir))
    rules = _load_rules_arg(args.rules)
    session_ids = [args.session] if args.session else store.list_sessions()
    total_violations = 0
    for sid in session_ids:
        report = lint_session(store.load(sid), rules)
        total_violations += len(report.violations)
        print(f"== {sid} ==")
        print(report.render(), end="")
    return EXIT_FINDINGS if total_violations else EXIT_OK


# --- export --------------------------------------------------------------------


def _cmd_export(args) -> int:
    store = SessionStore(_resolve_store_dir(args.store_dir))
    try:
        bundle = export_dataset(
            store, args.out, rules=_load_rules_arg(args.rules), force=args.force
        )
    except LintBlocked as exc:
        print(f"export blocked: {exc}", file=sys.stderr)
        for finding in exc.findings:
            print(f"  {finding}", file=sys.stderr)
        return EXIT_FINDINGS
    print(
        f"exported {len(bundle.session_ids)} session(s), "
        f"{len(bundle.table_ids)} table(s), {bundle.n_pairs} pair(s) to {args.out}"
    )
    return EXIT_OK


# --- analyze -------------------------------------------------------------------

_EFFECTS = {
    "strategy": strategy_effect,
    "provenance": provenance_effect,
    "variant": variant_effect,
}


def _cmd_analyze(args) -> int:
    sessions = import_bundle(args.export)
    records = read_predictions(Path(args.predictions).read_text(encoding="utf-8"))
    try:
        rows = _EFFECTS[args.by](records, sessions)
    except (JoinFailure, EmptySelection) as exc:
        print(f"analysis failed: {exc}", file=sys.stderr)
        return EXIT_FINDINGS
    print(render_effect_table(rows), end="")
    if args.csv:
        Path(args.csv).write_text(render_effect_csv(rows), encoding="utf-8")
        print(f"wrote {args.csv}")
    return EXIT_OK


# --- stats ---------------------------------------------------------------------


def _cmd_stats(args) -> int:
    sessions = import_bundle(args.export)
    stats = dataset_stats(sessions)
    if args.json:
        print(json.dumps(stats.to_dict(), indent=2))
    else:
        print(render_stats(stats), end="")
    return EXIT_OK


# --- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tabforge",
        description="Counterfactual table annotation: seed, edit, lint, export, score.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init", help="seed a store of sessions from a corpus")
    p.add_argument("--corpus", required=True, help="corpus manifest JSON")
    p.add_argument("--policy", required=True, help="perturbation policy JSON")
    p.add_argument("--hypotheses", required=True, help="seed hypothesis TSV")
    p.add_argument("--out", required=True, help="store directory to create")
    p.add_argument("--seed", type=int, default=None, help="override the policy seed")
    p.set_defaults(func=_cmd_init)

    p = sub.add_parser("serve", help="run the annotation API (and UI, if bundled)")
    p.add_argument("--store-dir", default=None)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--rules-file", default=None, help="date-order rules JSON")
    p.add_argument("--ui-dir", default=None, help="static UI bundle to mount at /")
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("lint", help="check sessions for violations")
    p.add_argument("--store-dir", default=None)
    p.add_argument("--session", default=None, help="lint one session instead of all")
    p.add_argument("--rules", default=None)
    p.set_defaults(func=_cmd_lint)

    p = sub.add_parser("export", help="write the distribution bundle")
    p.add_argument("--store-dir", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--force", action="store_true", help="export despite lint violations")
    p.add_argument("--rules", default=None)
    p.set_defaults(func=_cmd_export)

    p = sub.add_parser("analyze", help="score predictions against an exported bundle")
    p.add_argument("--export", required=True, help="bundle directory to join against")
    p.add_argument("--predictions", required=True, help="prediction TSV")
    p.add_argument("--by", choices=sorted(_EFFECTS), default="variant")
    p.add_argument("--csv", default=None, help="also write rows as CSV")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("stats", help="corpus counts from an exported bundle")
    p.add_argument("--export", required=True, help="bundle directory to count")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_stats)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (JoinFailure, EmptySelection, LintBlocked) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FINDINGS
    except StorageFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FINDINGS
    except TabforgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

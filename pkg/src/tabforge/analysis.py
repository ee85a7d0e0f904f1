"""Scoring model predictions against exported pairs.

Predictions arrive as a TSV of (pair_id, gold, pred) rows. Accuracy is
percentage correct rounded to two decimals. Effect analyses compare
accuracy on counterfactual pairs with accuracy on their matched original
pairs (same session, same hypothesis slot), grouped by rewriting
strategy, by value-source prefix, or by variant. Every counterfactual
record must join both to a session and to its original-side prediction;
a miss raises instead of silently shrinking the denominator.
"""

from dataclasses import dataclass

from .bits import STRATEGY_NAMES
from .errors import EmptySelection, JoinFailure, MalformedJson
from .session import (
    COUNTERFACTUAL_VARIANTS,
    ORIGINAL_VARIANT,
    AnnotationSession,
    pair_id_for,
)
from .types import Hypothesis, Label, Table

PREDICTION_COLUMNS = ("pair_id", "gold", "pred")

EFFECT_CSV_COLUMNS = ("group_key", "n", "acc_orig", "acc_cf", "drop", "drop_rel")


@dataclass(frozen=True)
class PredictionRecord:
    pair_id: str
    gold: Label
    pred: Label

    @property
    def correct(self) -> bool:
        return self.gold == self.pred


def read_predictions(text: str) -> list[PredictionRecord]:
    """Parse a prediction TSV (header line optional)."""
    records = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        fields = line.split("\t")
        if fields[0] == PREDICTION_COLUMNS[0]:
            continue
        if len(fields) != len(PREDICTION_COLUMNS):
            raise MalformedJson(
                f"predictions line {lineno}: expected {len(PREDICTION_COLUMNS)} "
                f"columns, got {len(fields)}"
            )
        pair_id, gold, pred = fields
        records.append(
            PredictionRecord(pair_id, Label.from_letter(gold), Label.from_letter(pred))
        )
    return records


def write_predictions(records: list[PredictionRecord]) -> str:
    lines = ["\t".join(PREDICTION_COLUMNS)]
    lines.extend(f"{r.pair_id}\t{r.gold.value}\t{r.pred.value}" for r in records)
    return "\n".join(lines) + "\n"


def accuracy(records: list[PredictionRecord]) -> float:
    """Percentage of records with pred == gold, rounded to 2 decimals."""
    if not records:
        raise EmptySelection("cannot score an empty selection")
    correct = sum(1 for r in records if r.correct)
    return round(100.0 * correct / len(records), 2)


@dataclass(frozen=True)
class EffectRow:
    group_key: str
    n: int
    acc_orig: float | None
    acc_cf: float | None
    drop: float | None
    drop_rel: float | None


def effect_row(group_key: str, n: int, acc_orig: float, acc_cf: float) -> EffectRow:
    """Build a row from already-computed accuracies."""
    drop = round(acc_orig - acc_cf, 2)
    drop_rel = round(100.0 * (acc_orig - acc_cf) / acc_orig, 2) if acc_orig else 0.0
    return EffectRow(group_key, n, acc_orig, acc_cf, drop, drop_rel)


def _empty_row(group_key: str) -> EffectRow:
    return EffectRow(group_key, 0, None, None, None, None)


@dataclass(frozen=True)
class PairInfo:
    session_id: str
    variant: str
    index: int
    hypothesis: Hypothesis
    table: Table


def build_pair_index(sessions: dict[str, AnnotationSession]) -> dict[str, PairInfo]:
    index: dict[str, PairInfo] = {}
    for sid in sorted(sessions):
        session = sessions[sid]
        for variant, hyps in session.hypotheses.items():
            table = session.table_for(variant)
            for i, hyp in enumerate(hyps, start=1):
                index[pair_id_for(sid, variant, i)] = PairInfo(sid, variant, i, hyp, table)
    return index


def _matched_groups(
    records: list[PredictionRecord],
    sessions: dict[str, AnnotationSession],
    group_keys_of,
) -> dict[str, tuple[list[PredictionRecord], list[PredictionRecord]]]:
    """Split counterfactual records into groups, pairing each with the
    prediction for its original-table twin. Original records are counted
    once per counterfactual that maps to them."""
    index = build_pair_index(sessions)
    by_id = {r.pair_id: r for r in records}
    groups: dict[str, tuple[list, list]] = {}
    for record in records:
        info = index.get(record.pair_id)
        if info is None:
            raise JoinFailure(record.pair_id, "pair id not found in any session")
        if info.variant == ORIGINAL_VARIANT:
            continue
        orig_id = pair_id_for(info.session_id, ORIGINAL_VARIANT, info.index)
        orig_record = by_id.get(orig_id)
        if orig_record is None:
            raise JoinFailure(record.pair_id, f"no prediction for original pair {orig_id}")
        for key in group_keys_of(info):
            cf_list, orig_list = groups.setdefault(key, ([], []))
            cf_list.append(record)
            orig_list.append(orig_record)
    return groups


def _rows_for(groups, keys) -> list[EffectRow]:
    rows = []
    for key in keys:
        if key not in groups:
            rows.append(_empty_row(key))
            continue
        cf_records, orig_records = groups[key]
        rows.append(
            effect_row(key, len(cf_records), accuracy(orig_records), accuracy(cf_records))
        )
    return rows


def strategy_effect(
    records: list[PredictionRecord], sessions: dict[str, AnnotationSession]
) -> list[EffectRow]:
    """One row per rewriting strategy, in flag order, groups overlapping.

    A hypothesis flagged with several strategies counts toward each; one
    with none counts toward none. All six rows are always emitted.
    """

    def keys_of(info: PairInfo):
        flags = info.hypothesis.strategies
        return [name for name in STRATEGY_NAMES if getattr(flags, name)]

    groups = _matched_groups(records, sessions, keys_of)
    return _rows_for(groups, STRATEGY_NAMES)


def provenance_effect(
    records: list[PredictionRecord], sessions: dict[str, AnnotationSession]
) -> list[EffectRow]:
    """One row per value-source prefix observed under relevant keys.

    Each counterfactual pair is attributed to every distinct 4-bit source
    prefix among the cells its hypothesis marks as relevant.
    """

    def keys_of(info: PairInfo):
        prefixes = set()
        for key in info.hypothesis.relevant_keys:
            section = info.table.section(key)
            if section is None:
                continue
            for cell in section.values:
                prefixes.add(cell.provenance.source_prefix)
        return sorted(prefixes)

    groups = _matched_groups(records, sessions, keys_of)
    return _rows_for(groups, sorted(groups))


def variant_effect(
    records: list[PredictionRecord], sessions: dict[str, AnnotationSession]
) -> list[EffectRow]:
    """One row per counterfactual variant (A, B, C)."""
    groups = _matched_groups(records, sessions, lambda info: [info.variant])
    return _rows_for(groups, COUNTERFACTUAL_VARIANTS)


# --- corpus-level counts ---------------------------------------------------------


@dataclass(frozen=True)
class DatasetStats:
    n_sessions: int
    n_original_tables: int
    n_original_pairs: int
    n_counterfactual_tables: int
    n_counterfactual_pairs: int

    def to_dict(self) -> dict:
        return {
            "n_sessions": self.n_sessions,
            "n_original_tables": self.n_original_tables,
            "n_original_pairs": self.n_original_pairs,
            "n_counterfactual_tables": self.n_counterfactual_tables,
            "n_counterfactual_pairs": self.n_counterfactual_pairs,
        }


def dataset_stats(sessions: dict[str, AnnotationSession]) -> DatasetStats:
    """Corpus counts; a draft only counts as a table once it has hypotheses."""
    n_orig_pairs = 0
    n_cf_tables = 0
    n_cf_pairs = 0
    for session in sessions.values():
        n_orig_pairs += len(session.hypotheses[ORIGINAL_VARIANT])
        for variant in COUNTERFACTUAL_VARIANTS:
            hyps = session.hypotheses[variant]
            if hyps:
                n_cf_tables += 1
                n_cf_pairs += len(hyps)
    return DatasetStats(
        n_sessions=len(sessions),
        n_original_tables=len(sessions),
        n_original_pairs=n_orig_pairs,
        n_counterfactual_tables=n_cf_tables,
        n_counterfactual_pairs=n_cf_pairs,
    )


# --- rendering -------------------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.2f}"
    return str(value)


def render_effect_csv(rows: list[EffectRow]) -> str:
    lines = [",".join(EFFECT_CSV_COLUMNS)]
    for row in rows:
        lines.append(
            ",".join(
                _fmt(v)
                for v in (row.group_key, row.n, row.acc_orig, row.acc_cf, row.drop, row.drop_rel)
            )
        )
    return "\n".join(lines) + "\n"


def render_effect_table(rows: list[EffectRow]) -> str:
    header = EFFECT_CSV_COLUMNS
    table = [header] + [
        tuple(
            _fmt(v)
            for v in (row.group_key, row.n, row.acc_orig, row.acc_cf, row.drop, row.drop_rel)
        )
        for row in rows
    ]
    widths = [max(len(r[i]) for r in table) for i in range(len(header))]
    lines = ["  ".join(cell.ljust(widths[i]) for i, cell in enumerate(r)).rstrip() for r in table]
    return "\n".join(lines) + "\n"


def render_stats(stats: DatasetStats) -> str:
    d = stats.to_dict()
    width = max(len(k) for k in d)
    return "\n".join(f"{k.ljust(width)}  {v}" for k, v in d.items()) + "\n"

"""Annotation sessions: one fixed original table plus three editable drafts.

The session JSON layout (bitstrings stored as text, tables in the extended
table format with their provenance sidecars):

    {
      "session_id": "T14",
      "revision": 3,
      "original": { ...table object... },
      "counterfactuals": {"A": {...}, "B": {...}, "C": {...}},
      "hypotheses": {
        "orig": [{"hyp_id": "h1", "text": "...", "label": "E",
                  "strategies": "000000", "relevant_keys": []}, ...],
        "A": [...], "B": [...], "C": [...]
      }
    }
"""

import json
from dataclasses import dataclass, field

from .bits import decode_strategy_flags, encode_strategy_flags
from .errors import InvariantViolation, MalformedJson, MissingField
from .tablejson import _load_object, table_from_object, table_to_object
from .types import Hypothesis, Label, Table

ORIGINAL_VARIANT = "orig"
COUNTERFACTUAL_VARIANTS = ("A", "B", "C")
ALL_VARIANTS = (ORIGINAL_VARIANT,) + COUNTERFACTUAL_VARIANTS


def pair_id_for(session_id: str, variant: str, index: int) -> str:
    """Stable id for the (table, hypothesis) pair at 1-based ``index``."""
    return f"{session_id}_{variant}_{index}"


def split_pair_id(pair_id: str) -> tuple[str, str, int]:
    """Inverse of ``pair_id_for``; session ids may themselves contain '_'."""
    parts = pair_id.rsplit("_", 2)
    if len(parts) != 3 or parts[1] not in ALL_VARIANTS or not parts[2].isdigit():
        raise MalformedJson(f"not a pair id: {pair_id!r}")
    return parts[0], parts[1], int(parts[2])


@dataclass
class AnnotationSession:
    session_id: str
    original: Table
    counterfactuals: dict[str, Table]
    hypotheses: dict[str, list[Hypothesis]]
    revision: int = 0

    def table_for(self, variant: str) -> Table:
        if variant == ORIGINAL_VARIANT:
            return self.original
        if variant in self.counterfactuals:
            return self.counterfactuals[variant]
        raise InvariantViolation(f"unknown variant: {variant!r}")

    def validate(self, strict_relevant_keys: bool = False) -> None:
        if not self.session_id:
            raise InvariantViolation("session_id must be non-empty")
        if self.revision < 0:
            raise InvariantViolation("revision must be non-negative")
        self.original.validate()
        if set(self.counterfactuals) != set(COUNTERFACTUAL_VARIANTS):
            raise InvariantViolation("counterfactuals must hold exactly variants A, B, C")
        for table in self.counterfactuals.values():
            table.validate()
        if set(self.hypotheses) != set(ALL_VARIANTS):
            raise InvariantViolation("hypotheses must hold exactly variants orig, A, B, C")
        for variant, hyps in self.hypotheses.items():
            table_keys = set(self.table_for(variant).keys())
            seen_ids = set()
            for hyp in hyps:
                if not hyp.hyp_id:
                    raise InvariantViolation("hyp_id must be non-empty")
                if hyp.hyp_id in seen_ids:
                    raise InvariantViolation(f"duplicate hyp_id {hyp.hyp_id!r} in {variant}")
                seen_ids.add(hyp.hyp_id)
                if not hyp.text.strip():
                    raise InvariantViolation(f"blank hypothesis text: {variant}/{hyp.hyp_id}")
                if strict_relevant_keys:
                    dangling = [k for k in hyp.relevant_keys if k not in table_keys]
                    if dangling:
                        raise InvariantViolation(
                            f"{variant}/{hyp.hyp_id}: relevant keys not in table: {dangling}"
                        )


def hypothesis_to_object(hyp: Hypothesis) -> dict:
    return {
        "hyp_id": hyp.hyp_id,
        "text": hyp.text,
        "label": hyp.label.value,
        "strategies": encode_strategy_flags(hyp.strategies),
        "relevant_keys": list(hyp.relevant_keys),
    }


def hypothesis_from_object(obj: dict) -> Hypothesis:
    for fld in ("hyp_id", "text", "label"):
        if fld not in obj:
            raise MissingField(fld)
    keys = obj.get("relevant_keys", [])
    if not isinstance(keys, list) or any(not isinstance(k, str) for k in keys):
        raise MalformedJson('"relevant_keys" must be a list of strings')
    return Hypothesis(
        hyp_id=obj["hyp_id"],
        text=obj["text"],
        label=Label.from_letter(obj["label"]),
        strategies=decode_strategy_flags(obj.get("strategies", "000000")),
        relevant_keys=list(keys),
    )


def session_to_object(session: AnnotationSession) -> dict:
    return {
        "session_id": session.session_id,
        "revision": session.revision,
        "original": table_to_object(session.original),
        "counterfactuals": {
            v: table_to_object(session.counterfactuals[v]) for v in COUNTERFACTUAL_VARIANTS
        },
        "hypotheses": {
            v: [hypothesis_to_object(h) for h in session.hypotheses[v]] for v in ALL_VARIANTS
        },
    }


def serialize_session(session: AnnotationSession) -> str:
    """Canonical session JSON text; equal sessions serialize byte-identically."""
    return json.dumps(session_to_object(session), ensure_ascii=False, indent=2) + "\n"


def session_from_object(obj: dict) -> AnnotationSession:
    for fld in ("session_id", "revision", "original", "counterfactuals", "hypotheses"):
        if fld not in obj:
            raise MissingField(fld)
    counterfactuals = obj["counterfactuals"]
    hypotheses = obj["hypotheses"]
    if not isinstance(counterfactuals, dict) or not isinstance(hypotheses, dict):
        raise MalformedJson('"counterfactuals" and "hypotheses" must be objects')
    if not isinstance(obj["revision"], int) or isinstance(obj["revision"], bool):
        raise MalformedJson('"revision" must be an integer')
    for v in COUNTERFACTUAL_VARIANTS:
        if v not in counterfactuals:
            raise MissingField(f"counterfactuals.{v}")
    for v in ALL_VARIANTS:
        if v not in hypotheses:
            raise MissingField(f"hypotheses.{v}")

    session = AnnotationSession(
        session_id=obj["session_id"],
        original=table_from_object(obj["original"], allow_empty_sections=True),
        counterfactuals={
            v: table_from_object(counterfactuals[v], allow_empty_sections=True)
            for v in COUNTERFACTUAL_VARIANTS
        },
        hypotheses={
            v: [hypothesis_from_object(h) for h in hypotheses[v]] for v in ALL_VARIANTS
        },
        revision=obj["revision"],
    )
    session.validate()
    return session


def parse_session(json_text: str) -> AnnotationSession:
    return session_from_object(_load_object(json_text))

"""Seeded automatic perturbation of tables and session construction.

Each cell of the original table is independently replaced (with a
configurable probability) by a value drawn from the corpus pool. The draw
happens in two stages: first a 4-bit source class is sampled from the
policy's class weights, restricted to classes that actually have candidates
(and, for cross-key classes, to source keys type-compatible with the
destination key); then a value is drawn uniformly from that class. The
class bits are recorded as the cell's provenance prefix.

Everything is driven by ``random.Random(seed)``, so a fixed seed yields a
byte-identical result.
"""

import copy
import json
import logging
import random
from dataclasses import dataclass, field
from pathlib import Path

from .bits import ValueProvenance
from .errors import InvariantViolation, MalformedJson, MissingField, NotFound
from .grouping import CategoryMap
from .pool import VALID_SOURCE_CLASSES, Location, SourceClass, ValuePool
from .session import COUNTERFACTUAL_VARIANTS, AnnotationSession
from .tablejson import parse_table
from .types import DatasetTag, Hypothesis, Table, ValueCell

log = logging.getLogger(__name__)


def default_class_weights() -> dict[SourceClass, float]:
    return {cls: 1.0 for cls in VALID_SOURCE_CLASSES}


@dataclass
class InitPolicy:
    perturb_probability: float = 0.5
    class_weights: dict[SourceClass, float] = field(default_factory=default_class_weights)
    seed: int = 0

    def validate(self) -> None:
        if not 0.0 <= self.perturb_probability <= 1.0:
            raise InvariantViolation("perturb_probability must be in [0, 1]")
        positive = False
        for cls, weight in self.class_weights.items():
            if weight < 0:
                raise InvariantViolation(f"negative weight for class {cls.bits()}")
            if weight > 0 and not cls.is_valid():
                raise InvariantViolation(
                    f"class {cls.bits()} breaks the same-table rule and cannot be sampled"
                )
            if weight > 0 and cls.is_valid():
                positive = True
        if not positive:
            raise InvariantViolation("at least one valid source class needs positive weight")


def load_policy(path: str | Path, seed_override: int | None = None) -> InitPolicy:
    """Read a policy JSON file: {perturb_probability, class_weights, seed}.

    ``class_weights`` maps 4-bit strings to weights and may cover all 16
    patterns; patterns violating the same-table rule must carry weight 0.
    """
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (ValueError, TypeError) as exc:
        raise MalformedJson(f"policy file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise MalformedJson("policy file must hold a JSON object")

    weights = default_class_weights()
    if "class_weights" in data:
        raw = data["class_weights"]
        if not isinstance(raw, dict):
            raise MalformedJson('"class_weights" must be an object keyed by 4-bit strings')
        weights = {cls: 0.0 for cls in VALID_SOURCE_CLASSES}
        for bits, weight in raw.items():
            cls = SourceClass.from_bits(bits)
            if not isinstance(weight, (int, float)):
                raise MalformedJson(f"weight for {bits!r} must be a number")
            if cls.is_valid():
                weights[cls] = float(weight)
            elif weight > 0:
                raise InvariantViolation(
                    f"class {bits!r} breaks the same-table rule and cannot be sampled"
                )

    policy = InitPolicy(
        perturb_probability=float(data.get("perturb_probability", 0.5)),
        class_weights=weights,
        seed=seed_override if seed_override is not None else int(data.get("seed", 0)),
    )
    policy.validate()
    return policy


@dataclass
class ReplacementRecord:
    """One replaced cell: where the new value truly came from."""

    key: str
    value_index: int
    source: Location
    text: str
    original_text: str
    bits: str  # 4-bit source-class prefix as recorded on the cell


def _perturb(
    original: Table,
    pool: ValuePool,
    cmap: CategoryMap,
    policy: InitPolicy,
    seed: int,
) -> tuple[Table, list[ReplacementRecord]]:
    policy.validate()
    original.validate()
    if original.table_id not in pool.tables:
        raise NotFound(f"table {original.table_id!r} is not in the pool")

    rng = random.Random(seed)
    draft = copy.deepcopy(original)
    replacements: list[ReplacementRecord] = []

    for section in draft.sections:
        origin = pool.location_of(original.table_id, section.key)
        dst_group = cmap.group_of(section.key)

        def src_key_ok(key: str) -> bool:
            return dst_group is None or cmap.group_of(key) == dst_group

        for index, cell in enumerate(section.values):
            cell.provenance = ValueProvenance()
            if rng.random() >= policy.perturb_probability:
                continue

            eligible: list[tuple[SourceClass, float, list[tuple[Location, str]]]] = []
            for cls in VALID_SOURCE_CLASSES:
                weight = policy.class_weights.get(cls, 0.0)
                if weight <= 0:
                    continue
                candidates = pool.candidates(origin, cls, src_key_filter=src_key_ok)
                if candidates:
                    eligible.append((cls, weight, candidates))

            if not eligible:
                log.warning(
                    "no source class has candidates for %s/%s[%d]; cell left unperturbed",
                    original.table_id,
                    section.key,
                    index,
                )
                continue

            cls, _, candidates = rng.choices(
                eligible, weights=[w for _, w, _ in eligible], k=1
            )[0]
            source, text = rng.choice(candidates)
            replacements.append(
                ReplacementRecord(
                    key=section.key,
                    value_index=index,
                    source=source,
                    text=text,
                    original_text=cell.text,
                    bits=cls.bits(),
                )
            )
            cell.text = text
            cell.provenance = ValueProvenance(
                from_other_dataset=cls.other_dataset,
                from_other_category=cls.other_category,
                from_other_table=cls.other_table,
                from_other_key=cls.other_key,
            )
    return draft, replacements


def auto_initialize(
    original: Table,
    pool: ValuePool,
    cmap: CategoryMap,
    policy: InitPolicy,
    seed: int | None = None,
) -> Table:
    """Perturbed copy of ``original`` (seed defaults to the policy seed)."""
    draft, _ = _perturb(original, pool, cmap, policy, policy.seed if seed is None else seed)
    return draft


def auto_initialize_with_report(
    original: Table,
    pool: ValuePool,
    cmap: CategoryMap,
    policy: InitPolicy,
    seed: int | None = None,
) -> tuple[Table, list[ReplacementRecord]]:
    """Like auto_initialize, plus a record of every replacement's true source."""
    return _perturb(original, pool, cmap, policy, policy.seed if seed is None else seed)


def init_session(
    original: Table,
    hypotheses: list[Hypothesis],
    pool: ValuePool,
    cmap: CategoryMap,
    policy: InitPolicy,
) -> AnnotationSession:
    """Build a session: three independently seeded drafts plus hypothesis copies.

    Draft seeds are policy.seed XOR the 1-based variant index, so drafts
    differ from each other yet stay reproducible. Copied hypotheses keep
    text and label but start with zero strategies and no relevant keys.
    """
    if not hypotheses:
        raise InvariantViolation("a session needs at least one hypothesis")

    counterfactuals = {}
    for index, variant in enumerate(COUNTERFACTUAL_VARIANTS, start=1):
        draft = auto_initialize(original, pool, cmap, policy, seed=policy.seed ^ index)
        draft.table_id = f"{original.table_id}_{variant}"
        counterfactuals[variant] = draft

    hyp_map: dict[str, list[Hypothesis]] = {"orig": copy.deepcopy(hypotheses)}
    for variant in COUNTERFACTUAL_VARIANTS:
        hyp_map[variant] = [
            Hypothesis(hyp_id=h.hyp_id, text=h.text, label=h.label) for h in hypotheses
        ]

    session = AnnotationSession(
        session_id=original.table_id,
        original=copy.deepcopy(original),
        counterfactuals=counterfactuals,
        hypotheses=hyp_map,
        revision=0,
    )
    session.validate()
    return session


def load_corpus(manifest_path: str | Path) -> list[tuple[Table, DatasetTag]]:
    """Read a corpus manifest: a JSON list of {path, dataset_tag, category}.

    Paths are resolved relative to the manifest file. A table's id is the
    file stem unless the entry carries an explicit "table_id".
    """
    manifest_path = Path(manifest_path)
    try:
        entries = json.loads(manifest_path.read_text(encoding="utf-8"))
    except (ValueError, TypeError) as exc:
        raise MalformedJson(f"corpus manifest is not valid JSON: {exc}") from exc
    if not isinstance(entries, list):
        raise MalformedJson("corpus manifest must hold a JSON list")

    corpus = []
    for entry in entries:
        if not isinstance(entry, dict):
            raise MalformedJson("each manifest entry must be an object")
        for fld in ("path", "dataset_tag"):
            if fld not in entry:
                raise MissingField(fld)
        table_path = manifest_path.parent / entry["path"]
        text = table_path.read_text(encoding="utf-8")
        category = entry.get("category")
        table = parse_table(
            text,
            table_id=entry.get("table_id") or table_path.stem,
            category=category,
        )
        if not table.category:
            raise MissingField("category")
        corpus.append((table, DatasetTag.from_name(entry["dataset_tag"])))
    return corpus

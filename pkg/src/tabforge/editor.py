"""Type-validated edit commands over an annotation session.

``apply_edit`` is a pure transition: it never touches the input session and
returns a fresh one with the revision bumped, or raises with the input left
intact. The original table is never mutated by any command; dragging from
it copy-pastes and stamps the copied-from-original bit instead.

Provenance bookkeeping per command:

    MoveValue (counterfactual source)   provenance travels with the cell
    MoveValue (original source)         fresh record with bit 5 set
    AddValue / AddSection               fresh record with bit 6 set
    EditValueText                       bit 7 set, all other bits preserved
"""

import copy
from dataclasses import dataclass, replace
from typing import Union

from .bits import StrategyFlags, ValueProvenance, decode_strategy_flags, encode_strategy_flags
from .errors import (
    DuplicateKey,
    EmptyText,
    ForbiddenOriginalEdit,
    MalformedJson,
    MissingField,
    NotFound,
    TypeViolation,
)
from .grouping import CategoryMap
from .session import ALL_VARIANTS, ORIGINAL_VARIANT, AnnotationSession
from .types import Label, Section, Table, ValueCell


@dataclass(frozen=True)
class CellRef:
    variant: str
    key: str
    value_index: int


@dataclass(frozen=True)
class MoveValue:
    src: CellRef
    dst_variant: str
    dst_key: str
    dst_position: int


@dataclass(frozen=True)
class AddValue:
    variant: str
    key: str
    text: str


@dataclass(frozen=True)
class DeleteValue:
    ref: CellRef


@dataclass(frozen=True)
class EditValueText:
    ref: CellRef
    new_text: str


@dataclass(frozen=True)
class EditKey:
    variant: str
    key: str
    new_key: str


@dataclass(frozen=True)
class AddSection:
    variant: str
    key: str
    texts: tuple[str, ...]


@dataclass(frozen=True)
class DeleteSection:
    variant: str
    key: str


@dataclass(frozen=True)
class SetHypothesisText:
    variant: str
    hyp_id: str
    text: str


@dataclass(frozen=True)
class SetLabel:
    variant: str
    hyp_id: str
    label: Label


@dataclass(frozen=True)
class SetStrategies:
    variant: str
    hyp_id: str
    flags: StrategyFlags


@dataclass(frozen=True)
class SetRelevantKeys:
    variant: str
    hyp_id: str
    keys: tuple[str, ...]


EditCommand = Union[
    MoveValue,
    AddValue,
    DeleteValue,
    EditValueText,
    EditKey,
    AddSection,
    DeleteSection,
    SetHypothesisText,
    SetLabel,
    SetStrategies,
    SetRelevantKeys,
]


@dataclass(frozen=True)
class MoveValidation:
    compatible: bool
    src_group: str | None = None
    dst_group: str | None = None


def validate_move(cmap: CategoryMap, src_key: str, dst_key: str) -> MoveValidation:
    """Check type-group compatibility of dragging a value between two keys.

    Compatible when both keys share a group or either key is untyped.
    """
    src_group = cmap.group_of(src_key)
    dst_group = cmap.group_of(dst_key)
    if src_group is None or dst_group is None or src_group == dst_group:
        return MoveValidation(True, src_group, dst_group)
    return MoveValidation(False, src_group, dst_group)


# --- helpers over the working copy -------------------------------------------


def _mutable_table(session: AnnotationSession, variant: str) -> Table:
    if variant == ORIGINAL_VARIANT:
        raise ForbiddenOriginalEdit("the original table cannot be modified")
    if variant not in session.counterfactuals:
        raise NotFound(f"unknown variant: {variant!r}")
    return session.counterfactuals[variant]


def _any_table(session: AnnotationSession, variant: str) -> Table:
    if variant == ORIGINAL_VARIANT:
        return session.original
    if variant not in session.counterfactuals:
        raise NotFound(f"unknown variant: {variant!r}")
    return session.counterfactuals[variant]


def _section(table: Table, key: str) -> Section:
    section = table.section(key)
    if section is None:
        raise NotFound(f"no section {key!r} in table {table.table_id!r}")
    return section


def _cell(table: Table, key: str, index: int) -> ValueCell:
    section = _section(table, key)
    if not 0 <= index < len(section.values):
        raise NotFound(f"no value #{index} under {key!r} in table {table.table_id!r}")
    return section.values[index]


def _hypothesis(session: AnnotationSession, variant: str, hyp_id: str):
    if variant not in session.hypotheses:
        raise NotFound(f"unknown variant: {variant!r}")
    for hyp in session.hypotheses[variant]:
        if hyp.hyp_id == hyp_id:
            return hyp
    raise NotFound(f"no hypothesis {hyp_id!r} in variant {variant!r}")


def _require_text(text: str) -> str:
    if not text or not text.strip():
        raise EmptyText("text must be non-empty")
    return text


def _prune_relevant_keys(session: AnnotationSession, variant: str, key: str) -> None:
    for hyp in session.hypotheses[variant]:
        if key in hyp.relevant_keys:
            hyp.relevant_keys = [k for k in hyp.relevant_keys if k != key]


def _dedup(keys) -> list[str]:
    seen = set()
    out = []
    for key in keys:
        if key not in seen:
            seen.add(key)
            out.append(key)
    return out


# --- command application -------------------------------------------------------


def _apply_move(session: AnnotationSession, cmd: MoveValue, cmap: CategoryMap) -> None:
    src = cmd.src
    if src.variant not in ALL_VARIANTS:
        raise NotFound(f"unknown variant: {src.variant!r}")
    dst_table = _mutable_table(session, cmd.dst_variant)
    dst_section = _section(dst_table, cmd.dst_key)

    check = validate_move(cmap, src.key, cmd.dst_key)
    if not check.compatible:
        raise TypeViolation(src.key, cmd.dst_key, check.src_group, check.dst_group)

    if src.variant == ORIGINAL_VARIANT:
        # copy-paste: the original stays untouched
        cell = _cell(session.original, src.key, src.value_index)
        if not 0 <= cmd.dst_position <= len(dst_section.values):
            raise NotFound(f"insert position {cmd.dst_position} out of range")
        dst_section.values.insert(
            cmd.dst_position,
            ValueCell(cell.text, ValueProvenance(copied_from_original=True)),
        )
        return

    # cut-paste within/between counterfactual tables; provenance travels along
    src_table = session.counterfactuals[src.variant]
    src_section = _section(src_table, src.key)
    if not 0 <= src.value_index < len(src_section.values):
        raise NotFound(
            f"no value #{src.value_index} under {src.key!r} in table {src_table.table_id!r}"
        )
    limit = len(dst_section.values) - (1 if dst_section is src_section else 0)
    if not 0 <= cmd.dst_position <= limit:
        raise NotFound(f"insert position {cmd.dst_position} out of range")
    cell = src_section.values.pop(src.value_index)
    dst_section.values.insert(cmd.dst_position, cell)


def _apply(session: AnnotationSession, cmd: EditCommand, cmap: CategoryMap) -> None:
    if isinstance(cmd, MoveValue):
        _apply_move(session, cmd, cmap)

    elif isinstance(cmd, AddValue):
        table = _mutable_table(session, cmd.variant)
        section = _section(table, cmd.key)
        section.values.append(
            ValueCell(_require_text(cmd.text), ValueProvenance(newly_added=True))
        )

    elif isinstance(cmd, DeleteValue):
        table = _mutable_table(session, cmd.ref.variant)
        section = _section(table, cmd.ref.key)
        if not 0 <= cmd.ref.value_index < len(section.values):
            raise NotFound(
                f"no value #{cmd.ref.value_index} under {cmd.ref.key!r} "
                f"in table {table.table_id!r}"
            )
        section.values.pop(cmd.ref.value_index)
        if not section.values:
            table.sections.remove(section)
            _prune_relevant_keys(session, cmd.ref.variant, section.key)

    elif isinstance(cmd, EditValueText):
        table = _mutable_table(session, cmd.ref.variant)
        cell = _cell(table, cmd.ref.key, cmd.ref.value_index)
        cell.text = _require_text(cmd.new_text)
        cell.provenance = replace(cell.provenance, text_edited=True)

    elif isinstance(cmd, EditKey):
        table = _mutable_table(session, cmd.variant)
        section = _section(table, cmd.key)
        new_key = _require_text(cmd.new_key)
        if new_key != cmd.key and table.section(new_key) is not None:
            raise DuplicateKey(new_key)
        section.key = new_key
        for hyp in session.hypotheses[cmd.variant]:
            if cmd.key in hyp.relevant_keys:
                hyp.relevant_keys = _dedup(
                    new_key if k == cmd.key else k for k in hyp.relevant_keys
                )

    elif isinstance(cmd, AddSection):
        table = _mutable_table(session, cmd.variant)
        key = _require_text(cmd.key)
        if table.section(key) is not None:
            raise DuplicateKey(key)
        if not cmd.texts:
            raise EmptyText("a new section needs at least one value")
        cells = [
            ValueCell(_require_text(t), ValueProvenance(newly_added=True)) for t in cmd.texts
        ]
        table.sections.append(Section(key=key, values=cells))

    elif isinstance(cmd, DeleteSection):
        table = _mutable_table(session, cmd.variant)
        section = _section(table, cmd.key)
        table.sections.remove(section)
        _prune_relevant_keys(session, cmd.variant, cmd.key)

    elif isinstance(cmd, SetHypothesisText):
        hyp = _hypothesis(session, cmd.variant, cmd.hyp_id)
        hyp.text = _require_text(cmd.text)

    elif isinstance(cmd, SetLabel):
        hyp = _hypothesis(session, cmd.variant, cmd.hyp_id)
        hyp.label = cmd.label

    elif isinstance(cmd, SetStrategies):
        hyp = _hypothesis(session, cmd.variant, cmd.hyp_id)
        hyp.strategies = cmd.flags

    elif isinstance(cmd, SetRelevantKeys):
        hyp = _hypothesis(session, cmd.variant, cmd.hyp_id)
        table_keys = set(_any_table(session, cmd.variant).keys())
        for key in cmd.keys:
            if key not in table_keys:
                raise NotFound(f"relevant key {key!r} is not in the {cmd.variant} table")
        hyp.relevant_keys = _dedup(cmd.keys)

    else:
        raise MalformedJson(f"unknown command type: {type(cmd).__name__}")


def apply_edit(
    session: AnnotationSession, cmd: EditCommand, cmap: CategoryMap
) -> AnnotationSession:
    """Apply one command, returning the successor session (revision + 1).

    Raises without touching ``session`` if the command is invalid; edits
    are all-or-nothing.
    """
    successor = copy.deepcopy(session)
    _apply(successor, cmd, cmap)
    successor.revision = session.revision + 1
    return successor


# --- the canonical JSON envelope {op, ...} -------------------------------------

_OPS = {
    "move_value": MoveValue,
    "add_value": AddValue,
    "delete_value": DeleteValue,
    "edit_value_text": EditValueText,
    "edit_key": EditKey,
    "add_section": AddSection,
    "delete_section": DeleteSection,
    "set_hypothesis_text": SetHypothesisText,
    "set_label": SetLabel,
    "set_strategies": SetStrategies,
    "set_relevant_keys": SetRelevantKeys,
}

_OP_NAMES = {cls: name for name, cls in _OPS.items()}


def _ref_to_dict(ref: CellRef) -> dict:
    return {"variant": ref.variant, "key": ref.key, "value_index": ref.value_index}


def _ref_from_dict(obj) -> CellRef:
    if not isinstance(obj, dict):
        raise MalformedJson("cell ref must be an object")
    for fld in ("variant", "key", "value_index"):
        if fld not in obj:
            raise MissingField(fld)
    if not isinstance(obj["value_index"], int) or isinstance(obj["value_index"], bool):
        raise MalformedJson('"value_index" must be an integer')
    return CellRef(obj["variant"], obj["key"], obj["value_index"])


def command_to_dict(cmd: EditCommand) -> dict:
    """Serialize a command to its wire envelope."""
    name = _OP_NAMES.get(type(cmd))
    if name is None:
        raise MalformedJson(f"unknown command type: {type(cmd).__name__}")
    out: dict = {"op": name}
    if isinstance(cmd, MoveValue):
        out.update(
            src=_ref_to_dict(cmd.src),
            dst_variant=cmd.dst_variant,
            dst_key=cmd.dst_key,
            dst_position=cmd.dst_position,
        )
    elif isinstance(cmd, (DeleteValue, EditValueText)):
        out["ref"] = _ref_to_dict(cmd.ref)
        if isinstance(cmd, EditValueText):
            out["new_text"] = cmd.new_text
    elif isinstance(cmd, AddValue):
        out.update(variant=cmd.variant, key=cmd.key, text=cmd.text)
    elif isinstance(cmd, EditKey):
        out.update(variant=cmd.variant, key=cmd.key, new_key=cmd.new_key)
    elif isinstance(cmd, AddSection):
        out.update(variant=cmd.variant, key=cmd.key, texts=list(cmd.texts))
    elif isinstance(cmd, DeleteSection):
        out.update(variant=cmd.variant, key=cmd.key)
    elif isinstance(cmd, SetHypothesisText):
        out.update(variant=cmd.variant, hyp_id=cmd.hyp_id, text=cmd.text)
    elif isinstance(cmd, SetLabel):
        out.update(variant=cmd.variant, hyp_id=cmd.hyp_id, label=cmd.label.value)
    elif isinstance(cmd, SetStrategies):
        out.update(
            variant=cmd.variant,
            hyp_id=cmd.hyp_id,
            strategies=encode_strategy_flags(cmd.flags),
        )
    elif isinstance(cmd, SetRelevantKeys):
        out.update(variant=cmd.variant, hyp_id=cmd.hyp_id, keys=list(cmd.keys))
    return out


def _require(obj: dict, *fields: str) -> None:
    for fld in fields:
        if fld not in obj:
            raise MissingField(fld)


def command_from_dict(obj) -> EditCommand:
    """Parse a wire envelope into a command; raises for malformed input."""
    if not isinstance(obj, dict):
        raise MalformedJson("command envelope must be an object")
    if "op" not in obj:
        raise MissingField("op")
    op = obj["op"]
    cls = _OPS.get(op)
    if cls is None:
        raise MalformedJson(f"unknown op: {op!r}")

    def text_field(name: str) -> str:
        if not isinstance(obj[name], str):
            raise MalformedJson(f"{name!r} must be a string")
        return obj[name]

    if cls is MoveValue:
        _require(obj, "src", "dst_variant", "dst_key", "dst_position")
        if not isinstance(obj["dst_position"], int) or isinstance(obj["dst_position"], bool):
            raise MalformedJson('"dst_position" must be an integer')
        return MoveValue(
            src=_ref_from_dict(obj["src"]),
            dst_variant=text_field("dst_variant"),
            dst_key=text_field("dst_key"),
            dst_position=obj["dst_position"],
        )
    if cls is AddValue:
        _require(obj, "variant", "key", "text")
        return AddValue(text_field("variant"), text_field("key"), text_field("text"))
    if cls is DeleteValue:
        _require(obj, "ref")
        return DeleteValue(_ref_from_dict(obj["ref"]))
    if cls is EditValueText:
        _require(obj, "ref", "new_text")
        return EditValueText(_ref_from_dict(obj["ref"]), text_field("new_text"))
    if cls is EditKey:
        _require(obj, "variant", "key", "new_key")
        return EditKey(text_field("variant"), text_field("key"), text_field("new_key"))
    if cls is AddSection:
        _require(obj, "variant", "key", "texts")
        texts = obj["texts"]
        if not isinstance(texts, list) or any(not isinstance(t, str) for t in texts):
            raise MalformedJson('"texts" must be a list of strings')
        return AddSection(text_field("variant"), text_field("key"), tuple(texts))
    if cls is DeleteSection:
        _require(obj, "variant", "key")
        return DeleteSection(text_field("variant"), text_field("key"))
    if cls is SetHypothesisText:
        _require(obj, "variant", "hyp_id", "text")
        return SetHypothesisText(text_field("variant"), text_field("hyp_id"), text_field("text"))
    if cls is SetLabel:
        _require(obj, "variant", "hyp_id", "label")
        return SetLabel(
            text_field("variant"), text_field("hyp_id"), Label.from_letter(text_field("label"))
        )
    if cls is SetStrategies:
        _require(obj, "variant", "hyp_id", "strategies")
        return SetStrategies(
            text_field("variant"),
            text_field("hyp_id"),
            decode_strategy_flags(text_field("strategies")),
        )
    if cls is SetRelevantKeys:
        _require(obj, "variant", "hyp_id", "keys")
        keys = obj["keys"]
        if not isinstance(keys, list) or any(not isinstance(k, str) for k in keys):
            raise MalformedJson('"keys" must be a list of strings')
        return SetRelevantKeys(text_field("variant"), text_field("hyp_id"), tuple(keys))
    raise MalformedJson(f"unknown op: {op!r}")

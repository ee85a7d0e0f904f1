"""Table JSON parsing/serialization and the hypothesis TSV format.

The plain table format is one JSON object: "title" maps to a one-element
list, every other key maps to a list of value strings:

    {"title": ["New York Stock Exchange"], "Type": ["Stock exchange"], ...}

The extended format adds reserved underscore keys that plain files simply
omit:

    "_table_id"    stable table identifier (defaults to the title)
    "_category"    corpus category, e.g. "Movie"
    "_provenance"  sidecar: attribute key -> list of 7-char bitstrings,
                   parallel to that key's value list; absent keys mean
                   all-zero provenance

serialize_table is canonical: fixed key order, 2-space indent, UTF-8,
trailing newline, so identical tables serialize to identical bytes.
"""

import io
import json

from .bits import (
    ZERO_PROVENANCE,
    decode_strategy_flags,
    decode_value_provenance,
    encode_strategy_flags,
    encode_value_provenance,
)
from .errors import DuplicateKey, MalformedJson, MissingField
from .types import RESERVED_PREFIX, TITLE_KEY, Hypothesis, Label, Section, Table, ValueCell

_KNOWN_RESERVED = {"_table_id", "_category", "_provenance"}

TSV_COLUMNS = (
    "pair_id",
    "table_id",
    "variant",
    "hypothesis_text",
    "label",
    "strategy_bits",
    "relevant_keys",
)


def _reject_duplicates(pairs):
    obj = {}
    for key, value in pairs:
        if key in obj:
            raise DuplicateKey(key)
        obj[key] = value
    return obj


def _load_object(json_text: str) -> dict:
    try:
        obj = json.loads(json_text, object_pairs_hook=_reject_duplicates)
    except DuplicateKey:
        raise
    except (ValueError, TypeError) as exc:
        raise MalformedJson(f"not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise MalformedJson("top-level value must be a JSON object")
    return obj


def _string_list(key: str, value, allow_empty: bool = False) -> list[str]:
    if not isinstance(value, list) or (not value and not allow_empty):
        raise MalformedJson(f"key {key!r} must map to a non-empty list of strings")
    out = []
    for item in value:
        if not isinstance(item, str) or not item.strip():
            raise MalformedJson(f"key {key!r} holds a blank or non-string value")
        out.append(item)
    return out


def parse_table(
    json_text: str,
    table_id: str | None = None,
    category: str | None = None,
) -> Table:
    """Parse a table JSON document (plain or extended format).

    ``table_id`` / ``category`` arguments take precedence over in-file
    metadata; a plain file with neither falls back to the title as its id
    and an empty category.
    """
    return table_from_object(_load_object(json_text), table_id, category)


def table_from_object(
    obj: dict,
    table_id: str | None = None,
    category: str | None = None,
    allow_empty_sections: bool = False,
) -> Table:
    if TITLE_KEY not in obj:
        raise MissingField(TITLE_KEY)
    title_value = obj[TITLE_KEY]
    if not isinstance(title_value, list) or len(title_value) != 1 \
            or not isinstance(title_value[0], str) or not title_value[0].strip():
        raise MalformedJson('"title" must map to a one-element list with a non-empty string')
    title = title_value[0]

    file_table_id = obj.get("_table_id")
    file_category = obj.get("_category")
    for meta_key, meta_val in (("_table_id", file_table_id), ("_category", file_category)):
        if meta_val is not None and not isinstance(meta_val, str):
            raise MalformedJson(f"{meta_key!r} must be a string")

    sections = []
    for key, value in obj.items():
        if key == TITLE_KEY:
            continue
        if key.startswith(RESERVED_PREFIX):
            if key not in _KNOWN_RESERVED:
                raise MalformedJson(f"unknown reserved key {key!r}")
            continue
        texts = _string_list(key, value, allow_empty=allow_empty_sections)
        sections.append(Section(key=key, values=[ValueCell(t) for t in texts]))

    sidecar = obj.get("_provenance")
    if sidecar is not None:
        if not isinstance(sidecar, dict):
            raise MalformedJson('"_provenance" must be an object')
        by_key = {s.key: s for s in sections}
        for key, bitstrings in sidecar.items():
            if key not in by_key:
                raise MalformedJson(f'"_provenance" references unknown key {key!r}')
            section = by_key[key]
            if not isinstance(bitstrings, list) or len(bitstrings) != len(section.values):
                raise MalformedJson(
                    f'"_provenance" list for {key!r} must parallel its value list'
                )
            for i, bs in enumerate(bitstrings):
                section.values[i].provenance = decode_value_provenance(bs)

    table = Table(
        table_id=table_id or file_table_id or title,
        title=title,
        category=category if category is not None else (file_category or ""),
        sections=sections,
    )
    table.validate()
    return table


def table_to_object(t: Table) -> dict:
    t.validate()
    obj: dict = {TITLE_KEY: [t.title]}
    for section in t.sections:
        obj[section.key] = [cell.text for cell in section.values]

    sidecar = {}
    for section in t.sections:
        bitstrings = [encode_value_provenance(cell.provenance) for cell in section.values]
        if any(bs != ZERO_PROVENANCE for bs in bitstrings):
            sidecar[section.key] = bitstrings

    obj["_table_id"] = t.table_id
    if t.category:
        obj["_category"] = t.category
    if sidecar:
        obj["_provenance"] = sidecar
    return obj


def serialize_table(t: Table) -> str:
    """Render a table to canonical JSON text (byte-stable)."""
    return json.dumps(table_to_object(t), ensure_ascii=False, indent=2) + "\n"


# --- hypothesis TSV -----------------------------------------------------------

def _clean_tsv_field(text: str) -> str:
    # Tabs/newlines would corrupt the row structure.
    return " ".join(text.split())


def hypothesis_tsv_row(
    pair_id: str,
    table_id: str,
    variant: str,
    hyp: Hypothesis,
) -> str:
    fields = (
        pair_id,
        table_id,
        variant,
        _clean_tsv_field(hyp.text),
        hyp.label.value,
        encode_strategy_flags(hyp.strategies),
        ";".join(hyp.relevant_keys),
    )
    return "\t".join(fields)


def write_hypotheses_tsv(rows: list[str]) -> str:
    out = io.StringIO()
    out.write("\t".join(TSV_COLUMNS) + "\n")
    for row in rows:
        out.write(row + "\n")
    return out.getvalue()


def read_hypotheses_tsv(text: str) -> list[dict]:
    """Parse a hypothesis TSV into row dicts (header line optional)."""
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        fields = line.split("\t")
        if fields[0] == TSV_COLUMNS[0]:
            continue
        if len(fields) != len(TSV_COLUMNS):
            raise MalformedJson(
                f"TSV line {lineno}: expected {len(TSV_COLUMNS)} columns, got {len(fields)}"
            )
        pair_id, table_id, variant, text_field, label, strategy_bits, relevant = fields
        rows.append(
            {
                "pair_id": pair_id,
                "table_id": table_id,
                "variant": variant,
                "hypothesis": Hypothesis(
                    hyp_id=pair_id,
                    text=text_field,
                    label=Label.from_letter(label),
                    strategies=decode_strategy_flags(strategy_bits),
                    relevant_keys=[k for k in relevant.split(";") if k],
                ),
            }
        )
    return rows

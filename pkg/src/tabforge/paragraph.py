"""Render a table as one sentence per row, for feeding tables to NLI models."""

from .errors import UnknownKey
from .types import Table


def _join_values(texts: list[str]) -> str:
    if len(texts) == 1:
        return texts[0]
    return ", ".join(texts[:-1]) + " and " + texts[-1]


def table_to_paragraph(t: Table, keys_filter: list[str] | None = None) -> str:
    """One sentence per retained section, in table order.

    Template: "The {key} of {title} is {values}." with values joined by
    commas and a final "and". With ``keys_filter`` only those sections are
    rendered; every filter key must exist in the table.
    """
    if keys_filter is not None:
        existing = set(t.keys())
        for key in keys_filter:
            if key not in existing:
                raise UnknownKey(key)
        keep = set(keys_filter)
    else:
        keep = None

    sentences = []
    for section in t.sections:
        if keep is not None and section.key not in keep:
            continue
        if not section.values:  # transiently empty mid-edit; nothing to say
            continue
        values = _join_values([cell.text for cell in section.values])
        sentences.append(f"The {section.key} of {t.title} is {values}.")
    return " ".join(sentences)

"""Automatic grouping of attribute keys by the type of their values.

Groups gate drag-and-drop and cross-key shuffling: values may only move
between keys of the same group, while keys with no group ("untyped") are
unrestricted. The default tagger is a regex heuristic; callers can plug in
their own ``tag_value`` callable.
"""

import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable

from .types import Table

DATE = "DATE"
NUMBER = "NUMBER"
MONEY = "MONEY"
DURATION = "DURATION"
NAME = "NAME"
OTHER = "OTHER"

GROUPS = (DATE, NUMBER, MONEY, DURATION, NAME, OTHER)

_MONTHS = (
    "january|february|march|april|may|june|july|august|september|october|"
    "november|december|jan|feb|mar|apr|jun|jul|aug|sep|sept|oct|nov|dec"
)

_MONTH_DAY_YEAR = re.compile(rf"\b(?:{_MONTHS})\.?\s+\d{{1,2}}\s*,\s*\d{{3,4}}\b", re.I)
_DAY_MONTH_YEAR = re.compile(rf"\b\d{{1,2}}\s+(?:{_MONTHS})\.?\s+\d{{3,4}}\b", re.I)
_MONTH_YEAR = re.compile(rf"\b(?:{_MONTHS})\.?\s+\d{{3,4}}\b", re.I)
_ISO_DATE = re.compile(r"\b\d{4}-\d{2}-\d{2}\b")
_CURRENCY = re.compile(r"(?:US\$|\$|€|£|¥|₹)")
_DURATION = re.compile(
    r"\b\d+\s*(?:years?|months?|weeks?|days?|hours?|hrs?|h|minutes?|mins?|min|seconds?|secs?)\b",
    re.I,
)
_NUMERIC_ONLY = re.compile(r"^[\d,.\s%#+~-]+$")
_BARE_YEAR = re.compile(r"^\s*[12]\d{3}\s*$")


def tag_value(text: str) -> str:
    """Classify one value string into a type group (total function)."""
    s = text.strip()
    if _ISO_DATE.search(s) or _MONTH_DAY_YEAR.search(s) or _DAY_MONTH_YEAR.search(s):
        return DATE
    if _CURRENCY.search(s):
        return MONEY
    if _MONTH_YEAR.search(s):
        return DATE
    if _DURATION.search(s):
        return DURATION
    if _BARE_YEAR.match(s):
        return DATE
    if _NUMERIC_ONLY.match(s):
        return NUMBER
    words = re.findall(r"[^\s,]+", s)
    if (
        0 < len(words) <= 6
        and not any(ch.isdigit() for ch in s)
        and all(w[0].isupper() for w in words if w[0].isalpha())
        and any(w[0].isupper() for w in words)
    ):
        return NAME
    return OTHER


@dataclass
class CategoryMap:
    """Key -> type-group assignment; keys absent from the map are untyped."""

    groups: dict[str, str] = field(default_factory=dict)

    def group_of(self, key: str) -> str | None:
        return self.groups.get(key)

    def to_dict(self) -> dict:
        return dict(self.groups)

    @classmethod
    def from_dict(cls, data: dict) -> "CategoryMap":
        return cls(groups=dict(data))


def build_category_map(
    tables: list[Table],
    tagger: Callable[[str], str] = tag_value,
) -> CategoryMap:
    """Assign each key the strict-majority type of its values across the corpus.

    Keys whose value tags have no strict majority stay untyped.
    """
    tags_by_key: dict[str, Counter] = {}
    for table in tables:
        for section in table.sections:
            counter = tags_by_key.setdefault(section.key, Counter())
            for cell in section.values:
                counter[tagger(cell.text)] += 1

    groups = {}
    for key, counter in tags_by_key.items():
        total = sum(counter.values())
        if not total:
            continue
        group, count = counter.most_common(1)[0]
        if count * 2 > total:
            groups[key] = group
    return CategoryMap(groups=groups)

"""Core domain types: tables, sections, value cells, hypotheses, labels.

A Table is an ordered list of sections; each section pairs one attribute key
with an ordered list of value cells. Tables are treated as immutable values:
editing code always works on copies (see editor.apply_edit).
"""

from dataclasses import dataclass, field
from enum import Enum

from .bits import StrategyFlags, ValueProvenance
from .errors import DuplicateKey, EmptyTable, InvariantViolation

# Keys with structural meaning in the table JSON format; never attribute keys.
TITLE_KEY = "title"
RESERVED_PREFIX = "_"


class Label(Enum):
    ENTAIL = "E"
    CONTRADICT = "C"
    NEUTRAL = "N"

    @classmethod
    def from_letter(cls, letter: str) -> "Label":
        try:
            return cls(letter)
        except ValueError:
            raise InvariantViolation(f"unknown label letter: {letter!r}") from None


class DatasetTag(Enum):
    TRAIN = "train"
    TEST = "test"

    @classmethod
    def from_name(cls, name: str) -> "DatasetTag":
        try:
            return cls(name.lower())
        except ValueError:
            raise InvariantViolation(f"unknown dataset tag: {name!r}") from None


@dataclass
class ValueCell:
    text: str
    provenance: ValueProvenance = field(default_factory=ValueProvenance)


@dataclass
class Section:
    key: str
    values: list[ValueCell] = field(default_factory=list)


@dataclass
class Table:
    table_id: str
    title: str
    category: str
    sections: list[Section] = field(default_factory=list)

    def keys(self) -> list[str]:
        return [s.key for s in self.sections]

    def section(self, key: str) -> Section | None:
        for s in self.sections:
            if s.key == key:
                return s
        return None

    def validate(self) -> None:
        """Raise if a structural invariant is broken.

        Empty sections are deliberately NOT rejected here: they may exist
        transiently mid-edit and are surfaced by the linter instead.
        """
        if not self.table_id:
            raise InvariantViolation("table_id must be non-empty")
        if not self.title:
            raise InvariantViolation("title must be non-empty")
        if not self.sections:
            raise EmptyTable(f"table {self.table_id!r} has no sections")
        seen = set()
        for s in self.sections:
            if not s.key:
                raise InvariantViolation("section key must be non-empty")
            if s.key == TITLE_KEY or s.key.startswith(RESERVED_PREFIX):
                raise InvariantViolation(f"section key {s.key!r} is reserved")
            if s.key in seen:
                raise DuplicateKey(s.key)
            seen.add(s.key)
            for cell in s.values:
                if not cell.text.strip():
                    raise InvariantViolation(f"blank value text under key {s.key!r}")


@dataclass
class Hypothesis:
    hyp_id: str
    text: str
    label: Label
    strategies: StrategyFlags = field(default_factory=StrategyFlags)
    relevant_keys: list[str] = field(default_factory=list)

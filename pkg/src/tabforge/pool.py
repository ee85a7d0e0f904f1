"""Corpus-wide value pool indexed by (dataset split, category, table, key).

The pool answers one question: given a cell's location and a 4-bit source
class, which values in the corpus sit at a location that differs from the
origin in exactly the dimensions the class marks "different"?
"""

from dataclasses import dataclass, field
from typing import Callable, NamedTuple

from .errors import DuplicateTableId, InvariantViolation, NotFound
from .types import DatasetTag, Table


class Location(NamedTuple):
    tag: DatasetTag
    category: str
    table_id: str
    key: str


@dataclass(frozen=True)
class SourceClass:
    """4-bit sampling class: which location dimensions must differ."""

    other_dataset: bool = False
    other_category: bool = False
    other_table: bool = False
    other_key: bool = False

    def bits(self) -> str:
        return "".join(
            "1" if b else "0"
            for b in (self.other_dataset, self.other_category, self.other_table, self.other_key)
        )

    @classmethod
    def from_bits(cls, bits: str) -> "SourceClass":
        if len(bits) != 4 or any(c not in "01" for c in bits):
            raise InvariantViolation(f"source class must be 4 bits of '0'/'1': {bits!r}")
        return cls(*(c == "1" for c in bits))

    def is_valid(self) -> bool:
        # a same-table value is necessarily same-dataset and same-category
        if not self.other_table and (self.other_dataset or self.other_category):
            return False
        return True


VALID_SOURCE_CLASSES = tuple(
    sc
    for sc in (SourceClass.from_bits(f"{i:04b}") for i in range(16))
    if sc.is_valid()
)


def class_between(source: Location, destination: Location) -> SourceClass:
    """Derive the 4-bit class that relates a source location to a destination."""
    return SourceClass(
        other_dataset=source.tag != destination.tag,
        other_category=source.category != destination.category,
        other_table=source.table_id != destination.table_id,
        other_key=source.key != destination.key,
    )


@dataclass
class ValuePool:
    entries: dict[Location, list[str]] = field(default_factory=dict)
    # table_id -> (tag, category); table ids are globally unique
    tables: dict[str, tuple[DatasetTag, str]] = field(default_factory=dict)

    def add_table(self, table: Table, tag: DatasetTag) -> None:
        table.validate()
        if table.table_id in self.tables:
            raise DuplicateTableId(table.table_id)
        self.tables[table.table_id] = (tag, table.category)
        for section in table.sections:
            loc = Location(tag, table.category, table.table_id, section.key)
            self.entries[loc] = [cell.text for cell in section.values]

    def location_of(self, table_id: str, key: str) -> Location:
        if table_id not in self.tables:
            raise NotFound(f"table {table_id!r} is not in the pool")
        tag, category = self.tables[table_id]
        return Location(tag, category, table_id, key)

    def candidates(
        self,
        origin: Location,
        cls: SourceClass,
        src_key_filter: Callable[[str], bool] | None = None,
    ) -> list[tuple[Location, str]]:
        """All (location, value) pairs whose location matches ``cls`` exactly
        relative to ``origin``.

        ``src_key_filter`` restricts the source keys of cross-key classes
        (type-group compatibility); it is ignored for same-key classes.
        """
        found = []
        for loc, texts in self.entries.items():
            if class_between(loc, origin) != cls:
                continue
            if cls.other_key and src_key_filter is not None and not src_key_filter(loc.key):
                continue
            for text in texts:
                found.append((loc, text))
        return found


def build_value_pool(tables: list[tuple[Table, DatasetTag]]) -> ValuePool:
    pool = ValuePool()
    for table, tag in tables:
        pool.add_table(table, tag)
    return pool

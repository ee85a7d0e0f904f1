"""Bit-encoded cell provenance and hypothesis-strategy flags.

Each table value carries a 7-bit provenance record, serialized as a 7-char
'0'/'1' string (bit i of the record is character i-1):

    bit 1  value was drawn from the other dataset split
    bit 2  value was drawn from a different corpus category
    bit 3  value was drawn from a different table
    bit 4  value was drawn from under a different attribute key
    bit 5  value was copy-pasted from the original table
    bit 6  value was typed in as a brand-new cell
    bit 7  value text was manually edited at some point

Two structural rules hold for every valid record:

  * a value from the same table (bit 3 clear) is necessarily from the same
    dataset and category, so bits 1 and 2 must be clear as well;
  * a freshly typed value (bit 6) has no shuffle source and was not copied,
    so bits 1-5 must all be clear.

Hypothesis edits carry a separate 6-bit strategy record:

    bit 1  changed the table to flip the label
    bit 2  changed the hypothesis to flip the label
    bit 3  added true information from the table for lexical overlap
    bit 4  used the old hypothesis as a prompt for a rewrite
    bit 5  wrote a completely new hypothesis
    bit 6  other
"""

from dataclasses import dataclass

from .errors import BadChar, BadLength, InvariantViolation

PROVENANCE_BITS = 7
STRATEGY_BITS = 6

ZERO_PROVENANCE = "0" * PROVENANCE_BITS
ZERO_STRATEGIES = "0" * STRATEGY_BITS


@dataclass(frozen=True)
class ValueProvenance:
    """Per-cell 7-bit provenance record."""

    from_other_dataset: bool = False
    from_other_category: bool = False
    from_other_table: bool = False
    from_other_key: bool = False
    copied_from_original: bool = False
    newly_added: bool = False
    text_edited: bool = False

    def violations(self) -> list[str]:
        """Return human-readable descriptions of broken invariants (empty if valid)."""
        problems = []
        if not self.from_other_table and (self.from_other_dataset or self.from_other_category):
            problems.append(
                "bits 1/2 set while bit 3 is clear: a same-table value cannot "
                "come from another dataset or category"
            )
        if self.newly_added and (
            self.from_other_dataset
            or self.from_other_category
            or self.from_other_table
            or self.from_other_key
            or self.copied_from_original
        ):
            problems.append(
                "newly added value must have bits 1-5 clear: a typed-in value "
                "has no shuffle or copy source"
            )
        return problems

    def is_valid(self) -> bool:
        return not self.violations()

    @property
    def source_prefix(self) -> str:
        """The 4-bit shuffle-source prefix as a string, e.g. '1010'."""
        return "".join(
            "1" if b else "0"
            for b in (
                self.from_other_dataset,
                self.from_other_category,
                self.from_other_table,
                self.from_other_key,
            )
        )


@dataclass(frozen=True)
class StrategyFlags:
    """6-bit record of which hypothesis-perturbation strategies were used."""

    table_change_flip: bool = False
    hypothesis_change_flip: bool = False
    true_info_overlap: bool = False
    prompt_rewrite: bool = False
    new_hypothesis: bool = False
    other: bool = False


_PROVENANCE_FIELDS = (
    "from_other_dataset",
    "from_other_category",
    "from_other_table",
    "from_other_key",
    "copied_from_original",
    "newly_added",
    "text_edited",
)

_STRATEGY_FIELDS = (
    "table_change_flip",
    "hypothesis_change_flip",
    "true_info_overlap",
    "prompt_rewrite",
    "new_hypothesis",
    "other",
)

STRATEGY_NAMES = _STRATEGY_FIELDS


def _check_bitstring(s: str, length: int) -> None:
    if not isinstance(s, str) or len(s) != length:
        raise BadLength(f"expected a {length}-char bitstring, got {s!r}")
    for ch in s:
        if ch not in "01":
            raise BadChar(f"bitstring may only contain '0'/'1', got {s!r}")


def encode_value_provenance(p: ValueProvenance) -> str:
    """Serialize a provenance record to its 7-char bitstring.

    Raises InvariantViolation if the record breaks a structural rule.
    """
    problems = p.violations()
    if problems:
        raise InvariantViolation("; ".join(problems))
    return "".join("1" if getattr(p, f) else "0" for f in _PROVENANCE_FIELDS)


def decode_value_provenance(s: str, strict: bool = True) -> ValueProvenance:
    """Parse a 7-char bitstring into a provenance record.

    In strict mode (the default) a structurally invalid pattern raises
    InvariantViolation. In lenient mode the value is returned as-is so
    callers can surface a warning instead of failing.
    """
    _check_bitstring(s, PROVENANCE_BITS)
    p = ValueProvenance(**{f: s[i] == "1" for i, f in enumerate(_PROVENANCE_FIELDS)})
    if strict:
        problems = p.violations()
        if problems:
            raise InvariantViolation(f"{s!r}: " + "; ".join(problems))
    return p


def encode_strategy_flags(f: StrategyFlags) -> str:
    """Serialize strategy flags to their 6-char bitstring."""
    return "".join("1" if getattr(f, name) else "0" for name in _STRATEGY_FIELDS)


def decode_strategy_flags(s: str) -> StrategyFlags:
    """Parse a 6-char bitstring into strategy flags."""
    _check_bitstring(s, STRATEGY_BITS)
    return StrategyFlags(**{name: s[i] == "1" for i, name in enumerate(_STRATEGY_FIELDS)})

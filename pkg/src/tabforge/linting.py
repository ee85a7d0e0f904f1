"""Consistency checks over tables and whole sessions.

Two families of findings:

  * date-order violations against configurable key-pair rules, e.g. the
    earliest "Born" value must not postdate the earliest "Died" value;
  * structural problems a table should not ship with: empty sections,
    blank value texts, relevant-key references to keys that no longer
    exist.

Values nobody can parse as dates produce "unverifiable" notes, never
violations.
"""

import json
import re
from dataclasses import dataclass
from datetime import date, datetime
from importlib import resources
from pathlib import Path

from .errors import MalformedJson, MissingField
from .session import ALL_VARIANTS, AnnotationSession
from .types import Table

SEVERITY_VIOLATION = "violation"
SEVERITY_NOTE = "note"

DEFAULT_RULES_RESOURCE = "default_rules.json"

_BARE_YEAR = re.compile(r"^[12]\d{3}$")

# tried in order; first match wins
_DATE_FORMATS = (
    "%Y-%m-%d",
    "%B %d, %Y",
    "%b %d, %Y",
    "%d %B %Y",
    "%d %b %Y",
    "%B %Y",
    "%b %Y",
)


def parse_date(text: str) -> date | None:
    """Best-effort date extraction; trailing parentheticals are ignored."""
    cleaned = text.strip()
    if "(" in cleaned:
        cleaned = cleaned.split("(", 1)[0].strip()
    for fmt in _DATE_FORMATS:
        try:
            return datetime.strptime(cleaned, fmt).date()
        except ValueError:
            continue
    if _BARE_YEAR.match(cleaned):
        return date(int(cleaned), 1, 1)
    return None


@dataclass(frozen=True)
class ConstraintRule:
    earlier: str
    later: str


def default_rules() -> list["ConstraintRule"]:
    text = resources.files("tabforge.data").joinpath(DEFAULT_RULES_RESOURCE).read_text("utf-8")
    return _rules_from_json(text)


def load_rules(path: str | Path) -> list[ConstraintRule]:
    return _rules_from_json(Path(path).read_text("utf-8"))


def _rules_from_json(text: str) -> list[ConstraintRule]:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedJson(f"rules file is not valid JSON: {exc}") from exc
    if not isinstance(raw, list):
        raise MalformedJson("rules file must hold a JSON list")
    rules = []
    for entry in raw:
        if not isinstance(entry, dict):
            raise MalformedJson("each rule must be an object")
        for fld in ("earlier", "later"):
            if fld not in entry:
                raise MissingField(fld)
            if not isinstance(entry[fld], str) or not entry[fld].strip():
                raise MalformedJson(f"rule field {fld!r} must be a non-empty string")
        rules.append(ConstraintRule(entry["earlier"], entry["later"]))
    return rules


@dataclass(frozen=True)
class LintEntry:
    severity: str
    code: str
    variant: str
    message: str

    def to_dict(self) -> dict:
        return {
            "severity": self.severity,
            "code": self.code,
            "variant": self.variant,
            "message": self.message,
        }


@dataclass
class LintReport:
    entries: list[LintEntry]

    @property
    def violations(self) -> list[LintEntry]:
        return [e for e in self.entries if e.severity == SEVERITY_VIOLATION]

    @property
    def notes(self) -> list[LintEntry]:
        return [e for e in self.entries if e.severity == SEVERITY_NOTE]

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {"ok": self.ok, "entries": [e.to_dict() for e in self.entries]}

    def render(self) -> str:
        if not self.entries:
            return "clean: no findings\n"
        lines = [
            f"{e.severity}\t{e.code}\t{e.variant}\t{e.message}" for e in self.entries
        ]
        lines.append(f"{len(self.violations)} violation(s), {len(self.notes)} note(s)")
        return "\n".join(lines) + "\n"


def _earliest(table: Table, key: str) -> date | None:
    section = table.section(key)
    if section is None:
        return None
    dates = [d for d in (parse_date(cell.text) for cell in section.values) if d is not None]
    return min(dates) if dates else None


def lint_constraints(
    table: Table, rules: list[ConstraintRule], variant: str = ""
) -> list[LintEntry]:
    """Apply date-order rules to one table.

    A rule only fires when both of its keys are present. A present key
    whose values all defy parsing yields a single unverifiable note.
    """
    entries: list[LintEntry] = []
    unverifiable: set[str] = set()
    for rule in rules:
        earlier_section = table.section(rule.earlier)
        later_section = table.section(rule.later)
        if earlier_section is None or later_section is None:
            continue
        earlier = _earliest(table, rule.earlier)
        later = _earliest(table, rule.later)
        if earlier_section.values and earlier is None:
            unverifiable.add(rule.earlier)
        if later_section.values and later is None:
            unverifiable.add(rule.later)
        if earlier is not None and later is not None and earlier > later:
            entries.append(
                LintEntry(
                    SEVERITY_VIOLATION,
                    "date_order",
                    variant,
                    f"{rule.earlier!r} ({earlier.isoformat()}) is after "
                    f"{rule.later!r} ({later.isoformat()})",
                )
            )
    for key in sorted(unverifiable):
        entries.append(
            LintEntry(
                SEVERITY_NOTE,
                "unverifiable_date",
                variant,
                f"no parseable date under {key!r}",
            )
        )
    return entries


def _lint_structure(session: AnnotationSession, variant: str) -> list[LintEntry]:
    table = session.table_for(variant)
    entries = []
    for section in table.sections:
        if not section.values:
            entries.append(
                LintEntry(
                    SEVERITY_VIOLATION,
                    "empty_section",
                    variant,
                    f"section {section.key!r} has no values",
                )
            )
        for i, cell in enumerate(section.values):
            if not cell.text.strip():
                entries.append(
                    LintEntry(
                        SEVERITY_VIOLATION,
                        "blank_text",
                        variant,
                        f"value #{i} under {section.key!r} is blank",
                    )
                )
    keys = set(table.keys())
    for hyp in session.hypotheses[variant]:
        for key in hyp.relevant_keys:
            if key not in keys:
                entries.append(
                    LintEntry(
                        SEVERITY_VIOLATION,
                        "dangling_relevant_key",
                        variant,
                        f"hypothesis {hyp.hyp_id!r} references missing key {key!r}",
                    )
                )
    return entries


def lint_session(
    session: AnnotationSession, rules: list[ConstraintRule] | None = None
) -> LintReport:
    """Run constraint and structural checks over all four variants."""
    if rules is None:
        rules = default_rules()
    entries: list[LintEntry] = []
    for variant in ALL_VARIANTS:
        table = session.table_for(variant)
        entries.extend(lint_constraints(table, rules, variant=variant))
        entries.extend(_lint_structure(session, variant))
    return LintReport(entries)

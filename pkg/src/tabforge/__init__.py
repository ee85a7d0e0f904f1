"""Counterfactual table construction and annotation toolkit.

Build pipeline: load a corpus of attribute-value tables, seed each test
table with three automatically perturbed drafts, refine them in the
drag-and-drop editor (or over HTTP), lint for logical consistency,
export a distribution bundle, and score model predictions for the gap
between original and counterfactual accuracy.
"""

from .analysis import (
    DatasetStats,
    EffectRow,
    PredictionRecord,
    accuracy,
    dataset_stats,
    effect_row,
    provenance_effect,
    read_predictions,
    strategy_effect,
    variant_effect,
    write_predictions,
)
from .bits import (
    PROVENANCE_BITS,
    STRATEGY_BITS,
    STRATEGY_NAMES,
    StrategyFlags,
    ValueProvenance,
    decode_strategy_flags,
    decode_value_provenance,
    encode_strategy_flags,
    encode_value_provenance,
)
from .editor import (
    AddSection,
    AddValue,
    CellRef,
    DeleteSection,
    DeleteValue,
    EditCommand,
    EditKey,
    EditValueText,
    MoveValue,
    SetHypothesisText,
    SetLabel,
    SetRelevantKeys,
    SetStrategies,
    apply_edit,
    command_from_dict,
    command_to_dict,
    validate_move,
)
from .errors import TabforgeError
from .export import ExportBundle, export_dataset, import_bundle
from .grouping import CategoryMap, build_category_map, tag_value
from .initializer import (
    InitPolicy,
    auto_initialize,
    auto_initialize_with_report,
    init_session,
    load_corpus,
    load_policy,
)
from .linting import ConstraintRule, LintEntry, LintReport, lint_session, load_rules, parse_date
from .paragraph import table_to_paragraph
from .pool import SourceClass, ValuePool, build_value_pool, class_between
from .session import (
    ALL_VARIANTS,
    COUNTERFACTUAL_VARIANTS,
    ORIGINAL_VARIANT,
    AnnotationSession,
    pair_id_for,
    parse_session,
    serialize_session,
    split_pair_id,
)
from .store import SessionStore, epoch_clock, utc_clock
from .tablejson import parse_table, serialize_table
from .types import DatasetTag, Hypothesis, Label, Section, Table, ValueCell

__all__ = [
    "ALL_VARIANTS",
    "COUNTERFACTUAL_VARIANTS",
    "ORIGINAL_VARIANT",
    "PROVENANCE_BITS",
    "STRATEGY_BITS",
    "STRATEGY_NAMES",
    "AddSection",
    "AddValue",
    "AnnotationSession",
    "CategoryMap",
    "CellRef",
    "ConstraintRule",
    "DatasetStats",
    "DatasetTag",
    "DeleteSection",
    "DeleteValue",
    "EditCommand",
    "EditKey",
    "EditValueText",
    "EffectRow",
    "ExportBundle",
    "Hypothesis",
    "InitPolicy",
    "Label",
    "LintEntry",
    "LintReport",
    "MoveValue",
    "PredictionRecord",
    "Section",
    "SessionStore",
    "SetHypothesisText",
    "SetLabel",
    "SetRelevantKeys",
    "SetStrategies",
    "SourceClass",
    "StrategyFlags",
    "TabforgeError",
    "Table",
    "ValueCell",
    "ValuePool",
    "ValueProvenance",
    "accuracy",
    "apply_edit",
    "auto_initialize",
    "auto_initialize_with_report",
    "build_category_map",
    "build_value_pool",
    "class_between",
    "command_from_dict",
    "command_to_dict",
    "dataset_stats",
    "decode_strategy_flags",
    "decode_value_provenance",
    "effect_row",
    "encode_strategy_flags",
    "encode_value_provenance",
    "epoch_clock",
    "export_dataset",
    "import_bundle",
    "init_session",
    "lint_session",
    "load_corpus",
    "load_policy",
    "load_rules",
    "pair_id_for",
    "parse_date",
    "parse_session",
    "parse_table",
    "provenance_effect",
    "read_predictions",
    "serialize_session",
    "serialize_table",
    "split_pair_id",
    "strategy_effect",
    "table_to_paragraph",
    "tag_value",
    "utc_clock",
    "validate_move",
    "variant_effect",
    "write_predictions",
]

/**
 * Edit command envelopes, exactly as the API's POST /edits endpoint takes
 * them. The server owns all validation; these builders only shape JSON.
 */

import type { CellRef, LabelLetter, Variant } from "./types.js";

export interface EditEnvelope {
  op: string;
  [field: string]: unknown;
}

function refObject(ref: CellRef) {
  return { variant: ref.variant, key: ref.key, value_index: ref.index };
}

export function moveValue(
  src: CellRef,
  dstVariant: Variant,
  dstKey: string,
  dstPosition: number,
): EditEnvelope {
  return {
    op: "move_value",
    src: refObject(src),
    dst_variant: dstVariant,
    dst_key: dstKey,
    dst_position: dstPosition,
  };
}

export function addValue(variant: Variant, key: string, text: string): EditEnvelope {
  return { op: "add_value", variant, key, text };
}

export function deleteValue(ref: CellRef): EditEnvelope {
  return { op: "delete_value", ref: refObject(ref) };
}

export function editValueText(ref: CellRef, newText: string): EditEnvelope {
  return { op: "edit_value_text", ref: refObject(ref), new_text: newText };
}

export function editKey(variant: Variant, key: string, newKey: string): EditEnvelope {
  return { op: "edit_key", variant, key, new_key: newKey };
}

export function addSection(variant: Variant, key: string, texts: string[]): EditEnvelope {
  return { op: "add_section", variant, key, texts };
}

export function deleteSection(variant: Variant, key: string): EditEnvelope {
  return { op: "delete_section", variant, key };
}

export function setHypothesisText(
  variant: Variant,
  hypId: string,
  text: string,
): EditEnvelope {
  return { op: "set_hypothesis_text", variant, hyp_id: hypId, text };
}

export function setLabel(variant: Variant, hypId: string, label: LabelLetter): EditEnvelope {
  return { op: "set_label", variant, hyp_id: hypId, label };
}

export function setStrategies(variant: Variant, hypId: string, bits: string): EditEnvelope {
  return { op: "set_strategies", variant, hyp_id: hypId, strategies: bits };
}

export function setRelevantKeys(
  variant: Variant,
  hypId: string,
  keys: string[],
): EditEnvelope {
  return { op: "set_relevant_keys", variant, hyp_id: hypId, keys };
}

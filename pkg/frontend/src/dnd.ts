/**
 * Drag-and-drop rules that can be decided client-side.
 *
 * Only structural rules live here: the original table is fixed, so its
 * cells never start a drag and never accept a drop. Type-group checks stay
 * on the server; an incompatible drop is posted anyway and the 409 response
 * drives the snap-back.
 */

import { moveValue, deleteValue, type EditEnvelope } from "./commands.js";
import { sectionOf, type CellRef, type SessionView, type Variant } from "./types.js";

export const ORIGINAL_FIXED_MESSAGE =
  "The original table is fixed; copy values out with the copy button instead.";

export type DropTarget =
  | { kind: "section"; variant: Variant; key: string }
  | { kind: "trash"; variant: Variant };

export type DropPlan =
  | { ok: true; envelope: EditEnvelope }
  | { ok: false; reason: string };

/** Reason a drag must not start from this cell, or null when it may. */
export function dragRefusal(src: CellRef): string | null {
  return src.variant === "orig" ? ORIGINAL_FIXED_MESSAGE : null;
}

/**
 * Decide what a drop should post. Moves append at the end of the target
 * section (minding the editor's same-section bound); trash drops delete.
 */
export function planDrop(view: SessionView, src: CellRef, target: DropTarget): DropPlan {
  const refusal = dragRefusal(src);
  if (refusal !== null) return { ok: false, reason: refusal };
  if (target.kind === "trash") {
    return { ok: true, envelope: deleteValue(src) };
  }
  if (target.variant === "orig") {
    return { ok: false, reason: ORIGINAL_FIXED_MESSAGE };
  }
  const section = sectionOf(view, target.variant, target.key);
  if (section === null) {
    return { ok: false, reason: `no section ${target.key} in draft ${target.variant}` };
  }
  const sameSection = src.variant === target.variant && src.key === target.key;
  const position = sameSection ? section.cells.length - 1 : section.cells.length;
  return {
    ok: true,
    envelope: moveValue(src, target.variant, target.key, Math.max(position, 0)),
  };
}

/**
 * Copying from the original is a click flow, not a drag: the server's
 * move command with an "orig" source copies and leaves the original alone.
 */
export function planCopyFromOriginal(
  view: SessionView,
  src: CellRef,
  dstVariant: Variant,
  dstKey: string,
): DropPlan {
  if (src.variant !== "orig") {
    return { ok: false, reason: "copy source must be an original cell" };
  }
  if (dstVariant === "orig") {
    return { ok: false, reason: ORIGINAL_FIXED_MESSAGE };
  }
  const section = sectionOf(view, dstVariant, dstKey);
  if (section === null) {
    return { ok: false, reason: `no section ${dstKey} in draft ${dstVariant}` };
  }
  return {
    ok: true,
    envelope: moveValue(src, dstVariant, dstKey, section.cells.length),
  };
}

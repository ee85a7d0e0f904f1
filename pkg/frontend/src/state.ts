/**
 * Client state. Tables are never mutated locally: every table edit goes to
 * the server and the confirmed session replaces the view wholesale, so a
 * rejected edit leaves the render identical (that is the snap-back).
 *
 * dirty means "confirmed edits exist that no checkpoint covers yet".
 */

import { parseSession, type CellRef, type CheckpointWire, type SessionView, type SessionWire } from "./types.js";

export interface UiState {
  session: SessionView | null;
  checkpoints: CheckpointWire[];
  dirty: boolean;
  /** Cell armed by the original-table copy button, if any. */
  pendingCopy: CellRef | null;
  /** Transient message from the last rejected action. */
  toast: string | null;
  /** Blocking load failure; non-null shows the retry banner. */
  error: string | null;
  busy: boolean;
  /** Hypothesis whose strategy/relevant-rows modal is open, if any. */
  modal: { variant: string; hypId: string } | null;
}

export function initialState(): UiState {
  return {
    session: null,
    checkpoints: [],
    dirty: false,
    pendingCopy: null,
    toast: null,
    error: null,
    busy: false,
    modal: null,
  };
}

/** Install a server-confirmed session; marks dirty when the edit count grew. */
export function applyServerSession(state: UiState, wire: SessionWire): void {
  const next = parseSession(wire);
  if (state.session !== null && next.revision > state.session.revision) {
    state.dirty = true;
  }
  state.session = next;
  state.error = null;
}

export function applyCheckpointSaved(state: UiState, checkpoints: CheckpointWire[]): void {
  state.checkpoints = checkpoints;
  state.dirty = false;
}

export function applyRestored(
  state: UiState,
  wire: SessionWire,
  checkpoints: CheckpointWire[],
): void {
  state.session = parseSession(wire);
  state.checkpoints = checkpoints;
  state.dirty = false;
  state.pendingCopy = null;
}

export function showToast(state: UiState, message: string): void {
  state.toast = message;
}

export function clearToast(state: UiState): void {
  state.toast = null;
}

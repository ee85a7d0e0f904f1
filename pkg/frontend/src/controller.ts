/**
 * Glue between state, API, and rendering. All mutating calls funnel through
 * one queue so at most one edit request is in flight; interactions issued
 * while a request runs are applied in order after it.
 */

import { ApiFailure, type ApiClient } from "./api.js";
import * as commands from "./commands.js";
import { dragRefusal, planCopyFromOriginal, planDrop, type DropTarget } from "./dnd.js";
import {
  applyCheckpointSaved,
  applyRestored,
  applyServerSession,
  clearToast,
  initialState,
  showToast,
  type UiState,
} from "./state.js";
import type { CellRef, LabelLetter, Variant } from "./types.js";

export class Controller {
  readonly state: UiState = initialState();
  private queue: Promise<void> = Promise.resolve();
  private sessionId = "";

  constructor(
    private readonly api: ApiClient,
    private readonly rerender: (state: UiState) => void,
  ) {}

  private paint(): void {
    this.rerender(this.state);
  }

  /** Re-render from current state; for view-only changes like opening a modal. */
  repaint(): void {
    this.paint();
  }

  /** Clear a blocking error and fetch the session again. */
  retry(): Promise<void> {
    this.state.error = null;
    return this.loadSession(this.sessionId);
  }

  /** Serialize an action; failures inside are already turned into UI state. */
  private enqueue(action: () => Promise<void>): Promise<void> {
    this.queue = this.queue.then(action, action);
    return this.queue;
  }

  private failureMessage(err: unknown): string {
    if (err instanceof ApiFailure) return err.body.message;
    return err instanceof Error ? err.message : String(err);
  }

  async loadSession(id: string): Promise<void> {
    return this.enqueue(async () => {
      this.sessionId = id;
      this.state.busy = true;
      this.paint();
      try {
        const wire = await this.api.getSession(id);
        applyServerSession(this.state, wire);
        this.state.dirty = false;
        this.state.checkpoints = await this.api.listCheckpoints(id);
      } catch (err) {
        this.state.error = this.failureMessage(err);
      } finally {
        this.state.busy = false;
        this.paint();
      }
    });
  }

  /**
   * Apply one envelope right now. On success the confirmed session replaces
   * the view; on rejection nothing changes except the toast, which is
   * exactly the snap-back the drag handlers rely on.
   */
  private async applyEnvelope(envelope: commands.EditEnvelope): Promise<boolean> {
    if (this.state.session === null) return false;
    const expected = this.state.session.revision;
    this.state.busy = true;
    clearToast(this.state);
    this.paint();
    try {
      const wire = await this.api.postEdit(this.sessionId, envelope, expected);
      applyServerSession(this.state, wire);
      return true;
    } catch (err) {
      if (err instanceof ApiFailure && err.body.code === "revision_conflict") {
        this.state.error = "This session changed outside this tab; reload to continue.";
      } else {
        showToast(this.state, this.failureMessage(err));
      }
      return false;
    } finally {
      this.state.busy = false;
      this.paint();
    }
  }

  private postEdit(envelope: commands.EditEnvelope): Promise<void> {
    return this.enqueue(async () => {
      await this.applyEnvelope(envelope);
    });
  }

  performDrag(src: CellRef, target: DropTarget): Promise<void> {
    const view = this.state.session;
    if (view === null) return Promise.resolve();
    const plan = planDrop(view, src, target);
    if (!plan.ok) {
      showToast(this.state, plan.reason);
      this.paint();
      return Promise.resolve();
    }
    return this.postEdit(plan.envelope);
  }

  /** First half of the copy flow: remember the original cell. */
  armCopy(src: CellRef): void {
    if (dragRefusal(src) === null) return; // draft cells just drag
    this.state.pendingCopy = src;
    this.paint();
  }

  /** Second half: paste the armed original cell into a draft section. */
  pasteCopy(dstVariant: Variant, dstKey: string): Promise<void> {
    const view = this.state.session;
    const src = this.state.pendingCopy;
    if (view === null || src === null) return Promise.resolve();
    this.state.pendingCopy = null;
    const plan = planCopyFromOriginal(view, src, dstVariant, dstKey);
    if (!plan.ok) {
      showToast(this.state, plan.reason);
      this.paint();
      return Promise.resolve();
    }
    return this.postEdit(plan.envelope);
  }

  addValue(variant: Variant, key: string, text: string): Promise<void> {
    return this.postEdit(commands.addValue(variant, key, text));
  }

  addSection(variant: Variant, key: string, texts: string[]): Promise<void> {
    return this.postEdit(commands.addSection(variant, key, texts));
  }

  deleteSection(variant: Variant, key: string): Promise<void> {
    return this.postEdit(commands.deleteSection(variant, key));
  }

  editCellText(ref: CellRef, text: string): Promise<void> {
    return this.postEdit(commands.editValueText(ref, text));
  }

  editKey(variant: Variant, key: string, newKey: string): Promise<void> {
    return this.postEdit(commands.editKey(variant, key, newKey));
  }

  setHypothesisText(variant: Variant, hypId: string, text: string): Promise<void> {
    return this.postEdit(commands.setHypothesisText(variant, hypId, text));
  }

  setLabel(variant: Variant, hypId: string, label: LabelLetter): Promise<void> {
    return this.postEdit(commands.setLabel(variant, hypId, label));
  }

  setMetadata(
    variant: Variant,
    hypId: string,
    strategyBits: string,
    relevantKeys: string[],
  ): Promise<void> {
    return this.enqueue(async () => {
      const ok = await this.applyEnvelope(commands.setStrategies(variant, hypId, strategyBits));
      if (ok) await this.applyEnvelope(commands.setRelevantKeys(variant, hypId, relevantKeys));
    });
  }

  save(note = ""): Promise<void> {
    return this.enqueue(async () => {
      this.state.busy = true;
      this.paint();
      try {
        await this.api.saveCheckpoint(this.sessionId, note);
        const checkpoints = await this.api.listCheckpoints(this.sessionId);
        applyCheckpointSaved(this.state, checkpoints);
      } catch (err) {
        showToast(this.state, this.failureMessage(err));
      } finally {
        this.state.busy = false;
        this.paint();
      }
    });
  }

  restoreCheckpoint(number: number): Promise<void> {
    return this.enqueue(async () => {
      this.state.busy = true;
      this.paint();
      try {
        const wire = await this.api.restore(this.sessionId, number);
        const checkpoints = await this.api.listCheckpoints(this.sessionId);
        applyRestored(this.state, wire, checkpoints);
      } catch (err) {
        showToast(this.state, this.failureMessage(err));
      } finally {
        this.state.busy = false;
        this.paint();
      }
    });
  }

  /** Settle the action queue; test hook. */
  idle(): Promise<void> {
    return this.enqueue(() => Promise.resolve());
  }
}

/**
 * DOM rendering. The whole app re-renders from state after every confirmed
 * change; there is no partial DOM patching and no local table mutation, so
 * the screen always shows the last server-confirmed session.
 */

import type { Controller } from "./controller.js";
import { dragRefusal } from "./dnd.js";
import type { UiState } from "./state.js";
import {
  ALL_VARIANTS,
  DRAFTS,
  LABEL_TITLES,
  ORIGINAL,
  STRATEGY_TITLES,
  type CellRef,
  type HypothesisWire,
  type LabelLetter,
  type SessionView,
  type TableView,
  type Variant,
} from "./types.js";

export const DRAG_MIME = "application/x-cell-ref";

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className = "",
  text = "",
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

function cellRefOf(node: HTMLElement): CellRef {
  return {
    variant: node.dataset["variant"] as Variant,
    key: node.dataset["key"] ?? "",
    index: Number(node.dataset["index"] ?? "0"),
  };
}

function renderCell(doc: Document, ctl: Controller, ref: CellRef, text: string, bits: string) {
  const cell = el(doc, "span", "cell", text);
  cell.dataset["variant"] = ref.variant;
  cell.dataset["key"] = ref.key;
  cell.dataset["index"] = String(ref.index);
  cell.title = bits === "0000000" ? "untouched" : `provenance ${bits}`;

  const refusal = dragRefusal(ref);
  if (refusal === null) {
    cell.draggable = true;
    cell.addEventListener("dragstart", (event) => {
      event.dataTransfer?.setData(DRAG_MIME, JSON.stringify(ref));
    });
    cell.addEventListener("dblclick", () => {
      const edited = doc.defaultView?.prompt("Edit value", text);
      if (edited !== null && edited !== undefined && edited !== text) {
        void ctl.editCellText(ref, edited);
      }
    });
  } else {
    cell.draggable = false;
    cell.classList.add("cell-locked");
    const copy = el(doc, "button", "copy-btn", "⧉");
    copy.title = "Copy into a draft: click here, then click a draft section";
    copy.addEventListener("click", () => ctl.armCopy(ref));
    cell.appendChild(copy);
  }
  return cell;
}

function dropRef(event: DragEvent): CellRef | null {
  const raw = event.dataTransfer?.getData(DRAG_MIME);
  if (!raw) return null;
  return JSON.parse(raw) as CellRef;
}

function renderSection(
  doc: Document,
  ctl: Controller,
  state: UiState,
  variant: Variant,
  table: TableView,
  key: string,
) {
  const section = table.sections.find((s) => s.key === key);
  if (section === undefined) return el(doc, "div");
  const box = el(doc, "div", "section");
  box.dataset["variant"] = variant;
  box.dataset["key"] = key;

  const head = el(doc, "div", "key-row");
  const keyLabel = el(doc, "span", "key", key);
  head.appendChild(keyLabel);
  if (variant !== ORIGINAL) {
    keyLabel.addEventListener("dblclick", () => {
      const renamed = doc.defaultView?.prompt("Rename key", key);
      if (renamed) void ctl.editKey(variant, key, renamed);
    });
    const drop = el(doc, "button", "del-section-btn", "✕");
    drop.title = "Delete section";
    drop.addEventListener("click", () => void ctl.deleteSection(variant, key));
    head.appendChild(drop);
    if (state.pendingCopy !== null) {
      box.classList.add("paste-target");
      box.addEventListener("click", () => void ctl.pasteCopy(variant, key));
    }
  }
  box.appendChild(head);

  const cells = el(doc, "div", "cells");
  section.cells.forEach((cell, index) => {
    cells.appendChild(renderCell(doc, ctl, { variant, key, index }, cell.text, cell.bits));
  });
  if (variant !== ORIGINAL) {
    cells.addEventListener("dragover", (event) => event.preventDefault());
    cells.addEventListener("drop", (event) => {
      event.preventDefault();
      const src = dropRef(event);
      if (src) void ctl.performDrag(src, { kind: "section", variant, key });
    });

    const addBox = el(doc, "div", "add-box");
    const input = el(doc, "input", "add-input");
    input.placeholder = "Add new value";
    const add = el(doc, "button", "add-btn", "Add");
    add.addEventListener("click", () => {
      if (input.value.trim()) void ctl.addValue(variant, key, input.value);
    });
    addBox.append(input, add);
    box.append(cells, addBox);
  } else {
    box.appendChild(cells);
  }
  return box;
}

function renderTable(
  doc: Document,
  ctl: Controller,
  state: UiState,
  view: SessionView,
  variant: Variant,
) {
  const table = view.tables[variant];
  const card = el(doc, "div", variant === ORIGINAL ? "table-card original" : "table-card draft");
  card.dataset["variant"] = variant;

  const heading = variant === ORIGINAL ? `${table.title} (original)` : `Draft ${variant}`;
  card.appendChild(el(doc, "h2", "table-title", heading));

  for (const section of table.sections) {
    card.appendChild(renderSection(doc, ctl, state, variant, table, section.key));
  }

  if (variant !== ORIGINAL) {
    const newSection = el(doc, "button", "add-section-btn", "Add new section");
    newSection.addEventListener("click", () => {
      const key = doc.defaultView?.prompt("New section key");
      if (!key) return;
      const first = doc.defaultView?.prompt("First value");
      if (first) void ctl.addSection(variant, key, [first]);
    });
    card.appendChild(newSection);

    const trash = el(doc, "div", "trash", "Delete box: drop a value here");
    trash.dataset["variant"] = variant;
    trash.addEventListener("dragover", (event) => event.preventDefault());
    trash.addEventListener("drop", (event) => {
      event.preventDefault();
      const src = dropRef(event);
      if (src) void ctl.performDrag(src, { kind: "trash", variant });
    });
    card.appendChild(trash);
  }
  return card;
}

function renderHypothesis(
  doc: Document,
  ctl: Controller,
  variant: Variant,
  hyp: HypothesisWire,
) {
  const row = el(doc, "div", "hyp-row");
  row.dataset["variant"] = variant;
  row.dataset["hypId"] = hyp.hyp_id;

  const text = el(doc, "span", "hyp-text", hyp.text);
  text.addEventListener("dblclick", () => {
    const edited = doc.defaultView?.prompt("Edit hypothesis", hyp.text);
    if (edited) void ctl.setHypothesisText(variant, hyp.hyp_id, edited);
  });

  const label = el(doc, "select", "hyp-label");
  for (const letter of ["E", "C", "N"] as LabelLetter[]) {
    const option = el(doc, "option", "", LABEL_TITLES[letter]);
    option.value = letter;
    option.selected = letter === hyp.label;
    label.appendChild(option);
  }
  label.addEventListener("change", () => {
    void ctl.setLabel(variant, hyp.hyp_id, label.value as LabelLetter);
  });

  const meta = el(doc, "button", "hyp-meta-btn", "+");
  meta.title = "Strategies and relevant rows";
  meta.addEventListener("click", () => {
    ctl.state.modal = { variant, hypId: hyp.hyp_id };
    ctl.repaint();
  });

  row.append(text, label, meta);
  return row;
}

function renderModal(doc: Document, ctl: Controller, state: UiState, view: SessionView) {
  const open = state.modal;
  if (open === null) return null;
  const variant = open.variant as Variant;
  const hyp = (view.hypotheses[variant] ?? []).find((h) => h.hyp_id === open.hypId);
  if (hyp === undefined) return null;

  const overlay = el(doc, "div", "modal-overlay");
  const modal = el(doc, "div", "modal");
  modal.appendChild(el(doc, "h3", "", `Strategies for ${hyp.hyp_id} (${variant})`));

  const strategyBoxes: HTMLInputElement[] = [];
  const strategies = el(doc, "div", "modal-strategies");
  STRATEGY_TITLES.forEach((title, i) => {
    const wrap = el(doc, "label", "strategy-option", title);
    const box = el(doc, "input");
    box.type = "checkbox";
    box.checked = hyp.strategies[i] === "1";
    wrap.prepend(box);
    strategyBoxes.push(box);
    strategies.appendChild(wrap);
  });
  modal.appendChild(strategies);

  modal.appendChild(el(doc, "h3", "", "Relevant rows"));
  const relevantBoxes = new Map<string, HTMLInputElement>();
  const rows = el(doc, "div", "modal-rows");
  for (const section of view.tables[variant].sections) {
    const wrap = el(doc, "label", "row-option", section.key);
    const box = el(doc, "input");
    box.type = "checkbox";
    box.checked = hyp.relevant_keys.includes(section.key);
    wrap.prepend(box);
    relevantBoxes.set(section.key, box);
    rows.appendChild(wrap);
  }
  modal.appendChild(rows);

  const actions = el(doc, "div", "modal-actions");
  const apply = el(doc, "button", "modal-apply", "Apply");
  apply.addEventListener("click", () => {
    const bits = strategyBoxes.map((b) => (b.checked ? "1" : "0")).join("");
    const keys = [...relevantBoxes.entries()].filter(([, b]) => b.checked).map(([k]) => k);
    state.modal = null;
    void ctl.setMetadata(variant, hyp.hyp_id, bits, keys);
  });
  const cancel = el(doc, "button", "modal-cancel", "Cancel");
  cancel.addEventListener("click", () => {
    state.modal = null;
    ctl.repaint();
  });
  actions.append(apply, cancel);
  modal.appendChild(actions);
  overlay.appendChild(modal);
  return overlay;
}

export function render(root: HTMLElement, state: UiState, ctl: Controller): void {
  const doc = root.ownerDocument;
  root.replaceChildren();

  if (state.error !== null) {
    const banner = el(doc, "div", "banner-error", state.error);
    const retry = el(doc, "button", "retry-btn", "Retry");
    retry.addEventListener("click", () => void ctl.retry());
    banner.appendChild(retry);
    root.appendChild(banner);
    return;
  }

  const view = state.session;
  if (view === null) {
    root.appendChild(el(doc, "div", "loading", state.busy ? "Loading…" : "No session loaded"));
    return;
  }

  const header = el(doc, "header", "topbar");
  header.appendChild(el(doc, "h1", "", `Session ${view.sessionId}`));
  header.appendChild(
    el(doc, "span", state.dirty ? "dirty-flag dirty" : "dirty-flag", state.dirty ? "unsaved edits" : "saved"),
  );
  const save = el(doc, "button", "save-btn", "Save checkpoint");
  save.disabled = state.busy;
  save.addEventListener("click", () => void ctl.save());
  header.appendChild(save);
  root.appendChild(header);

  if (state.toast !== null) {
    const toast = el(doc, "div", "toast", state.toast);
    toast.setAttribute("role", "status");
    root.appendChild(toast);
  }

  const tables = el(doc, "div", "tables");
  for (const variant of ALL_VARIANTS) {
    tables.appendChild(renderTable(doc, ctl, state, view, variant));
  }
  root.appendChild(tables);

  const panel = el(doc, "div", "hyp-panel");
  for (const variant of ALL_VARIANTS) {
    const column = el(doc, "div", "hyp-column");
    column.dataset["variant"] = variant;
    column.appendChild(
      el(doc, "h3", "", variant === ORIGINAL ? "Original hypotheses" : `Draft ${variant} hypotheses`),
    );
    for (const hyp of view.hypotheses[variant] ?? []) {
      column.appendChild(renderHypothesis(doc, ctl, variant, hyp));
    }
    panel.appendChild(column);
  }
  root.appendChild(panel);

  const checkpoints = el(doc, "div", "checkpoints");
  checkpoints.appendChild(el(doc, "h3", "", "Checkpoints"));
  for (const cp of state.checkpoints) {
    const row = el(doc, "div", "checkpoint-row", `#${cp.number} ${cp.note || "(no note)"} `);
    row.dataset["number"] = String(cp.number);
    const restore = el(doc, "button", "restore-btn", "Restore");
    restore.addEventListener("click", () => void ctl.restoreCheckpoint(cp.number));
    row.appendChild(restore);
    checkpoints.appendChild(row);
  }
  root.appendChild(checkpoints);

  const modal = renderModal(doc, ctl, state, view);
  if (modal !== null) root.appendChild(modal);
}

/** Onboarding screen for an empty store. */
export function renderOnboarding(root: HTMLElement): void {
  const doc = root.ownerDocument;
  root.replaceChildren();
  const box = el(doc, "div", "onboarding");
  box.appendChild(el(doc, "h1", "", "No sessions yet"));
  box.appendChild(
    el(
      doc,
      "p",
      "",
      "Seed a store first: tabforge init --corpus corpus.json --policy policy.json " +
        "--hypotheses seeds.tsv --out STORE, then restart the server.",
    ),
  );
  root.appendChild(box);
}

export { DRAFTS };

/**
 * Wire formats of the annotation API and their parsed views.
 *
 * Tables arrive as flat JSON objects: one array of strings per key, in
 * display order, plus reserved fields for the title, ids, and the per-value
 * provenance sidecar. The parsed view regroups them into ordered sections so
 * the rest of the client never touches reserved keys.
 */

export type Variant = "orig" | "A" | "B" | "C";

export const ORIGINAL: Variant = "orig";
export const DRAFTS: readonly Variant[] = ["A", "B", "C"];
export const ALL_VARIANTS: readonly Variant[] = [ORIGINAL, ...DRAFTS];

export type LabelLetter = "E" | "C" | "N";

export const LABEL_TITLES: Record<LabelLetter, string> = {
  E: "Entail",
  C: "Contradict",
  N: "Neutral",
};

/** Annotator strategies, in bit order; index i reads strategy_bits[i]. */
export const STRATEGY_TITLES: readonly string[] = [
  "Table change flips label",
  "Hypothesis change flips label",
  "True info, low overlap",
  "Prompt rewrite",
  "New hypothesis",
  "Other",
];

export interface HypothesisWire {
  hyp_id: string;
  text: string;
  label: LabelLetter;
  strategies: string;
  relevant_keys: string[];
}

export interface SessionWire {
  session_id: string;
  revision: number;
  original: TableWire;
  counterfactuals: Record<string, TableWire>;
  hypotheses: Record<string, HypothesisWire[]>;
}

export interface SessionStub {
  session_id: string;
  revision: number;
}

export interface CheckpointWire {
  number: number;
  saved_at: string;
  note: string;
}

/** Flat table object; value keys map to string arrays. */
export type TableWire = Record<string, unknown>;

const RESERVED = new Set(["title", "_table_id", "_category", "_provenance"]);

export const ZERO_BITS = "0000000";

export interface CellView {
  text: string;
  /** 7-char provenance pattern; all zeroes for untouched values. */
  bits: string;
}

export interface SectionView {
  key: string;
  cells: CellView[];
}

export interface TableView {
  tableId: string;
  category: string;
  title: string;
  sections: SectionView[];
}

export interface SessionView {
  sessionId: string;
  revision: number;
  tables: Record<Variant, TableView>;
  hypotheses: Record<Variant, HypothesisWire[]>;
}

/** Address of one rendered value cell; index is position within its section. */
export interface CellRef {
  variant: Variant;
  key: string;
  index: number;
}

function asStrings(value: unknown, context: string): string[] {
  if (!Array.isArray(value) || value.some((v) => typeof v !== "string")) {
    throw new Error(`${context}: expected an array of strings`);
  }
  return value as string[];
}

export function parseTable(wire: TableWire): TableView {
  const provenance = (wire["_provenance"] ?? {}) as Record<string, unknown>;
  const sections: SectionView[] = [];
  for (const key of Object.keys(wire)) {
    if (RESERVED.has(key)) continue;
    const texts = asStrings(wire[key], `table key ${key}`);
    const bits =
      key in provenance ? asStrings(provenance[key], `provenance ${key}`) : [];
    sections.push({
      key,
      cells: texts.map((text, i) => ({ text, bits: bits[i] ?? ZERO_BITS })),
    });
  }
  const title = asStrings(wire["title"] ?? [""], "title");
  return {
    tableId: String(wire["_table_id"] ?? ""),
    category: String(wire["_category"] ?? ""),
    title: title[0] ?? "",
    sections,
  };
}

export function parseSession(wire: SessionWire): SessionView {
  const tables = { orig: parseTable(wire.original) } as Record<Variant, TableView>;
  const hypotheses = {} as Record<Variant, HypothesisWire[]>;
  hypotheses.orig = wire.hypotheses["orig"] ?? [];
  for (const variant of DRAFTS) {
    const table = wire.counterfactuals[variant];
    if (table === undefined) throw new Error(`session is missing draft ${variant}`);
    tables[variant] = parseTable(table);
    hypotheses[variant] = wire.hypotheses[variant] ?? [];
  }
  return {
    sessionId: wire.session_id,
    revision: wire.revision,
    tables,
    hypotheses,
  };
}

export function sectionOf(view: SessionView, variant: Variant, key: string): SectionView | null {
  return view.tables[variant].sections.find((s) => s.key === key) ?? null;
}

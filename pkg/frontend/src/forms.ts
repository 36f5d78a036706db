/**
 * Form row state and validation for the subscription and publication panels.
 * Validation mirrors what the broker rejects, so anything this module lets
 * through submits cleanly.
 */

import {
  Json,
  NUMBER_RE,
  Scalar,
  scalarToJson,
} from "./payload.js";

export const OPS = ["=", "!=", ">", ">=", "<", "<=", "in"] as const;
export type Op = (typeof OPS)[number];

export interface PredicateRow {
  attribute: string;
  op: string;
  value: string;
}

export interface PairRow {
  attribute: string;
  value: string;
}

const YEAR_RANGE_RE = /^(\d{4})-(\d{4}|present)$/;

/** Text field to typed value, in the broker's precedence: booleans, year
 * ranges, numbers, then plain symbols. Throws with a user-facing message. */
export function coerceValue(text: string): Scalar {
  const trimmed = text.trim();
  if (!trimmed) throw new Error("value must be non-empty");
  const lower = trimmed.toLowerCase();
  if (lower === "true" || lower === "false") {
    return { kind: "bool", value: lower === "true" };
  }
  const range = YEAR_RANGE_RE.exec(trimmed);
  if (range) {
    const start = Number(range[1]);
    const end = range[2] === "present" ? "present" : Number(range[2]);
    if (end !== "present" && end < start) {
      throw new Error(`year range ends before it starts: ${trimmed}`);
    }
    return { kind: "range", start, end };
  }
  if (NUMBER_RE.test(trimmed)) return { kind: "number", raw: trimmed };
  return { kind: "symbol", text: trimmed };
}

const isBlank = (s: string) => s.trim() === "";

export function predicateRowError(row: PredicateRow): string | null {
  if (isBlank(row.attribute)) return "attribute must be non-empty";
  if (!(OPS as readonly string[]).includes(row.op)) {
    return `unknown operator ${JSON.stringify(row.op)}`;
  }
  try {
    coerceValue(row.value);
  } catch (err) {
    return (err as Error).message;
  }
  return null;
}

export function pairRowError(row: PairRow): string | null {
  if (isBlank(row.attribute)) return "attribute must be non-empty";
  try {
    coerceValue(row.value);
  } catch (err) {
    return (err as Error).message;
  }
  return null;
}

/** Rows the user left entirely empty are ignored rather than rejected. */
export function activePredicateRows(rows: PredicateRow[]): PredicateRow[] {
  return rows.filter((r) => !(isBlank(r.attribute) && isBlank(r.value)));
}

export function activePairRows(rows: PairRow[]): PairRow[] {
  return rows.filter((r) => !(isBlank(r.attribute) && isBlank(r.value)));
}

export function canSubmitSubscription(rows: PredicateRow[]): boolean {
  const active = activePredicateRows(rows);
  return active.length > 0 && active.every((r) => predicateRowError(r) === null);
}

export function canSubmitEvent(rows: PairRow[]): boolean {
  const active = activePairRows(rows);
  return active.length > 0 && active.every((r) => pairRowError(r) === null);
}

export type PrecisionChoice =
  | { kind: "broker-default" }
  | { kind: "synonyms-only" }
  | { kind: "exact" }
  | { kind: "custom"; stages: string[]; maxGenerality?: number };

export function precisionJson(choice: PrecisionChoice): Json | undefined {
  switch (choice.kind) {
    case "broker-default":
      return undefined;
    case "synonyms-only":
      return { stages: ["synonym"] };
    case "exact":
      return { stages: [] };
    case "custom": {
      const doc: { [k: string]: Json } = { stages: [...choice.stages] };
      if (choice.maxGenerality !== undefined) {
        doc.max_generality = choice.maxGenerality;
      }
      return doc;
    }
  }
}

export function buildSubscription(
  subId: string,
  rows: PredicateRow[],
  precision: PrecisionChoice = { kind: "broker-default" },
): Json {
  const doc: { [k: string]: Json } = {
    predicates: activePredicateRows(rows).map((r) => [
      r.attribute.trim(),
      r.op,
      scalarToJson(coerceValue(r.value)),
    ]),
  };
  if (!isBlank(subId)) doc.sub_id = subId.trim();
  const p = precisionJson(precision);
  if (p !== undefined) doc.precision = p;
  return doc;
}

export function buildEvent(eventId: string, rows: PairRow[]): Json {
  const doc: { [k: string]: Json } = {
    pairs: activePairRows(rows).map((r) => [
      r.attribute.trim(),
      scalarToJson(coerceValue(r.value)),
    ]),
  };
  if (!isBlank(eventId)) doc.event_id = eventId.trim();
  return doc;
}

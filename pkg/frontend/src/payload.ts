/**
 * Payload construction primitives.
 *
 * The broker logs and replies in a canonical JSON form (recursively sorted
 * keys, no whitespace, ASCII escapes) and parses request numbers as exact
 * decimals. To round-trip byte-for-byte we serialize the same way and carry
 * user-entered numbers as raw text instead of IEEE doubles.
 */

/** A JSON number token kept verbatim, e.g. "0.30000000000000004". */
export class RawNumber {
  constructor(readonly text: string) {}
}

export type Json =
  | null
  | boolean
  | number
  | string
  | RawNumber
  | Json[]
  | { [key: string]: Json };

export const NUMBER_RE = /^[+-]?\d+(\.\d+)?([eE][+-]?\d+)?$/;

export function rawNumber(text: string): RawNumber {
  const trimmed = text.trim();
  if (!NUMBER_RE.test(trimmed)) {
    throw new Error(`not a number: ${JSON.stringify(text)}`);
  }
  return new RawNumber(trimmed);
}

/** JSON.stringify escapes control characters exactly like the broker; this
 * adds \uXXXX escapes for everything outside ASCII. */
function quote(s: string): string {
  return JSON.stringify(s).replace(
    /[\u007f-\uffff]/g,
    (c) => "\\u" + c.charCodeAt(0).toString(16).padStart(4, "0"),
  );
}

export function canonicalJson(value: Json): string {
  if (value === null) return "null";
  if (typeof value === "boolean") return value ? "true" : "false";
  if (typeof value === "number") {
    if (!Number.isFinite(value)) throw new Error("non-finite number");
    return String(value);
  }
  if (typeof value === "string") return quote(value);
  if (value instanceof RawNumber) return value.text;
  if (Array.isArray(value)) {
    return "[" + value.map(canonicalJson).join(",") + "]";
  }
  const body = Object.keys(value)
    .sort()
    .map((k) => quote(k) + ":" + canonicalJson(value[k] as Json))
    .join(",");
  return "{" + body + "}";
}

/** Typed form value, decided by `coerceValue` before encoding. */
export type Scalar =
  | { kind: "symbol"; text: string }
  | { kind: "number"; raw: string }
  | { kind: "bool"; value: boolean }
  | { kind: "range"; start: number; end: number | "present" };

const pad4 = (n: number) => String(n).padStart(4, "0");

export function scalarToJson(s: Scalar): Json {
  switch (s.kind) {
    case "symbol":
      return s.text;
    case "number":
      return new RawNumber(s.raw);
    case "bool":
      return s.value;
    case "range":
      return `${pad4(s.start)}-${s.end === "present" ? "present" : pad4(s.end)}`;
  }
}

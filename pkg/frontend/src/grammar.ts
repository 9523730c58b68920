// Parser for the rendered contrast-rule grammar:
//
//   rule      = clause { " AND " clause }
//   clause    = column " ∈ " spans | column " ∈ " symbols
//   spans     = span { " ∪ " span }
//   span      = "[" number ", " number ")"
//   symbols   = "{" token { ", " token } "}"
//
// The verdict view refuses to display a rule this parser rejects.

export interface NumericClause {
  column: string;
  spans: Array<[number, number]>;
}

export interface SymbolicClause {
  column: string;
  symbols: string[];
}

export type Clause = NumericClause | SymbolicClause;

const SPAN = /^\[(-?(?:\d+(?:\.\d+)?(?:[eE][+-]?\d+)?|inf(?:inity)?)), (-?(?:\d+(?:\.\d+)?(?:[eE][+-]?\d+)?|inf(?:inity)?))\)$/i;

function parseNumber(text: string): number {
  const t = text.toLowerCase();
  if (t === "inf" || t === "infinity") return Infinity;
  if (t === "-inf" || t === "-infinity") return -Infinity;
  const v = Number(text);
  if (Number.isNaN(v)) throw new Error(`bad number ${text}`);
  return v;
}

export function parseRule(text: string): Clause[] {
  if (!text) throw new Error("empty rule text");
  const clauses: Clause[] = [];
  for (const part of text.split(" AND ")) {
    const sep = part.indexOf(" ∈ ");
    if (sep <= 0) throw new Error(`clause missing " ∈ ": ${part}`);
    const column = part.slice(0, sep);
    const spans = part.slice(sep + 3);
    if (spans.startsWith("{") && spans.endsWith("}")) {
      const symbols = spans.slice(1, -1).split(", ");
      if (symbols.some((s) => s.length === 0)) throw new Error(`bad symbol set ${spans}`);
      clauses.push({ column, symbols });
      continue;
    }
    const intervals: Array<[number, number]> = [];
    for (const span of spans.split(" ∪ ")) {
      const m = SPAN.exec(span);
      if (!m) throw new Error(`bad span ${span}`);
      intervals.push([parseNumber(m[1]), parseNumber(m[2])]);
    }
    clauses.push({ column, spans: intervals });
  }
  return clauses;
}

// Minimal SPARQL syntax highlighting producing safe HTML.

import { escapeHtml } from "./results.js";

const KEYWORDS =
  /\b(PREFIX|SELECT|DISTINCT|WHERE|FILTER|OPTIONAL|GROUP BY|ORDER BY|ASC|DESC|LIMIT|OFFSET|AS|ASK|COUNT|SUM|AVG|MIN|MAX|REGEX|CONTAINS|STRSTARTS|STRENDS|YEAR|MONTH|DAY|BOUND|UNION)\b/gi;

type Piece = { kind: "iri" | "var" | "str" | "plain"; text: string };

function splitPieces(query: string): Piece[] {
  const pattern = /(<[^<>\s]*>)|(\?[A-Za-z_][A-Za-z0-9_]*)|("(?:[^"\\]|\\.)*")/g;
  const pieces: Piece[] = [];
  let last = 0;
  for (const match of query.matchAll(pattern)) {
    const at = match.index ?? 0;
    if (at > last) pieces.push({ kind: "plain", text: query.slice(last, at) });
    const text = match[0];
    pieces.push({ kind: match[1] ? "iri" : match[2] ? "var" : "str", text });
    last = at + text.length;
  }
  if (last < query.length) pieces.push({ kind: "plain", text: query.slice(last) });
  return pieces;
}

export function highlightSparql(query: string): string {
  return splitPieces(query)
    .map((piece) => {
      const safe = escapeHtml(piece.text);
      if (piece.kind === "plain") {
        return safe.replace(KEYWORDS, (kw) => `<span class="kw">${kw}</span>`);
      }
      return `<span class="${piece.kind}">${safe}</span>`;
    })
    .join("");
}

// Helpers over SPARQL results JSON: cell text, numeric parsing, column access.

import type { BindingCell, SparqlResults } from "./types.js";

export function cellText(cell: BindingCell | undefined): string {
  if (!cell) return "";
  return cell.value;
}

export function cellNumber(cell: BindingCell | undefined): number | null {
  if (!cell || cell.type === "uri" || cell.type === "bnode") return null;
  const value = Number(cell.value);
  return Number.isFinite(value) ? value : null;
}

/** Millisecond timestamp for temporal cells, null when unparseable. */
export function cellTime(cell: BindingCell | undefined): number | null {
  if (!cell) return null;
  const stamp = Date.parse(cell.value);
  return Number.isNaN(stamp) ? null : stamp;
}

export function columnValues(results: SparqlResults, name: string): (BindingCell | undefined)[] {
  return results.results.bindings.map((row) => row[name]);
}

export function numericColumn(results: SparqlResults, name: string): number[] {
  return columnValues(results, name)
    .map(cellNumber)
    .filter((v): v is number => v !== null);
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

// Sortable result table: HTML generation plus the pure sorting helper the
// click handlers use.

import { cellNumber, cellText, escapeHtml } from "./results.js";
import type { SparqlResults } from "./types.js";

export function sortBindings(
  results: SparqlResults,
  column: string,
  direction: "asc" | "desc",
): SparqlResults {
  const rows = [...results.results.bindings];
  const sign = direction === "asc" ? 1 : -1;
  rows.sort((a, b) => {
    const ca = a[column];
    const cb = b[column];
    const na = cellNumber(ca);
    const nb = cellNumber(cb);
    if (na !== null && nb !== null) return (na - nb) * sign;
    return cellText(ca).localeCompare(cellText(cb)) * sign;
  });
  return { head: results.head, results: { bindings: rows } };
}

export function renderResultsTable(results: SparqlResults, maxRows = 200): string {
  const vars = results.head.vars;
  const rows = results.results.bindings.slice(0, maxRows);
  const header = vars
    .map((v) => `<th data-col="${escapeHtml(v)}" title="click to sort">${escapeHtml(v)}</th>`)
    .join("");
  const body = rows
    .map((row) => {
      const cells = vars
        .map((v) => {
          const cell = row[v];
          const cls = cell?.type === "uri" ? ' class="iri-cell"' : "";
          return `<td${cls}>${escapeHtml(cellText(cell))}</td>`;
        })
        .join("");
      return `<tr>${cells}</tr>`;
    })
    .join("");
  const remaining = results.results.bindings.length - rows.length;
  const footer =
    remaining > 0
      ? `<tfoot><tr><td colspan="${vars.length}">… ${remaining} more rows</td></tr></tfoot>`
      : "";
  const empty =
    rows.length === 0
      ? `<tbody><tr><td colspan="${Math.max(vars.length, 1)}" class="empty">0 rows</td></tr></tbody>`
      : `<tbody>${body}</tbody>`;
  return `<table class="results" data-sortable><thead><tr>${header}</tr></thead>${empty}${footer}</table>`;
}

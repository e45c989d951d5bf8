// Attempt-trace panel: one card per attempt with query, status and duration.

import { highlightSparql } from "./highlight.js";
import { escapeHtml } from "./results.js";
import type { Trace } from "./types.js";

function statusBadge(trace: Trace): string {
  const ok = trace.outcome === "SUCCESS";
  return `<span class="badge ${ok ? "badge-ok" : "badge-fail"}">${trace.outcome}</span>`;
}

function attemptStatus(validation: string | null, execution: string | null): string {
  if (validation !== null) {
    return `<div class="attempt-error">validation: ${escapeHtml(validation)}</div>`;
  }
  if (execution !== null) {
    return `<div class="attempt-error">execution: ${escapeHtml(execution)}</div>`;
  }
  return `<div class="attempt-ok">validated and executed</div>`;
}

export function renderTrace(trace: Trace): string {
  const cards = trace.attempts
    .map((attempt, i) => {
      return (
        `<div class="attempt ${attempt.validation || attempt.execution ? "attempt-failed" : ""}">` +
        `<div class="attempt-head">attempt ${i + 1}` +
        `<span class="duration">${(attempt.duration * 1000).toFixed(1)} ms</span></div>` +
        `<pre class="sparql">${highlightSparql(attempt.query)}</pre>` +
        attemptStatus(attempt.validation, attempt.execution) +
        `</div>`
      );
    })
    .join("");
  const finalBlock = trace.final_query
    ? `<div class="final-query"><div class="attempt-head">final query ` +
      `<button class="copy-btn" data-copy="${escapeHtml(trace.final_query)}">copy</button></div>` +
      `<pre class="sparql">${highlightSparql(trace.final_query)}</pre></div>`
    : "";
  return (
    `<div class="trace">` +
    `<div class="trace-head">${trace.attempts.length} attempt(s) ${statusBadge(trace)}</div>` +
    cards +
    finalBlock +
    `</div>`
  );
}

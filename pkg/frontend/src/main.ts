// DOM wiring: question form, spinner, trace panel, chart/table view, history.

import { ApiError, askQuestion, getHealth } from "./api.js";
import { renderView } from "./chart.js";
import { SessionHistory } from "./history.js";
import { escapeHtml } from "./results.js";
import { renderResultsTable, sortBindings } from "./table.js";
import { renderTrace } from "./trace.js";
import type { AskResponse, SparqlResults } from "./types.js";

const history = new SessionHistory();
let inFlight = false;
let lastResults: SparqlResults | null = null;
let sortState: { column: string; direction: "asc" | "desc" } | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function setBusy(busy: boolean): void {
  inFlight = busy;
  el<HTMLButtonElement>("ask-btn").disabled = busy;
  el("spinner").style.display = busy ? "inline-block" : "none";
}

function showBanner(message: string, retry?: () => void): void {
  const banner = el("banner");
  banner.innerHTML =
    escapeHtml(message) + (retry ? ' <button id="retry-btn">retry</button>' : "");
  banner.style.display = "block";
  if (retry) {
    document.getElementById("retry-btn")?.addEventListener("click", () => {
      banner.style.display = "none";
      retry();
    });
  }
}

function hideBanner(): void {
  el("banner").style.display = "none";
}

function attachTableHandlers(container: HTMLElement): void {
  container.querySelectorAll("th[data-col]").forEach((th) => {
    th.addEventListener("click", () => {
      if (!lastResults) return;
      const column = (th as HTMLElement).dataset.col!;
      const direction =
        sortState?.column === column && sortState.direction === "asc" ? "desc" : "asc";
      sortState = { column, direction };
      container.innerHTML = renderResultsTable(sortBindings(lastResults, column, direction));
      attachTableHandlers(container);
    });
  });
}

function attachCopyHandlers(container: HTMLElement): void {
  container.querySelectorAll<HTMLElement>(".copy-btn").forEach((btn) => {
    btn.addEventListener("click", () => {
      const text = btn.dataset.copy ?? "";
      void navigator.clipboard?.writeText(text);
      btn.textContent = "copied";
      setTimeout(() => (btn.textContent = "copy"), 1200);
    });
  });
}

function renderResponse(response: AskResponse): void {
  lastResults = response.results;
  sortState = null;

  const tracePanel = el("trace-panel");
  tracePanel.innerHTML = renderTrace(response.trace);
  attachCopyHandlers(tracePanel);

  const view = el("result-view");
  const rendered =
    response.representation === "PLOT"
      ? renderView(response.chart_spec, response.results)
      : { html: renderResultsTable(response.results) };
  view.innerHTML =
    (rendered.warning ? `<div class="warning">${escapeHtml(rendered.warning)}</div>` : "") +
    rendered.html;
  attachTableHandlers(view);

  renderHistory();
}

function renderHistory(): void {
  const list = history
    .list()
    .map(
      (entry, i) =>
        `<li data-index="${i}">${escapeHtml(entry.question)} ` +
        `<span class="duration">${new Date(entry.timestamp).toLocaleTimeString()}</span></li>`,
    )
    .reverse()
    .join("");
  const panel = el("history-panel");
  panel.innerHTML = list ? `<ul>${list}</ul>` : "<p class=\"empty\">no questions yet</p>";
  panel.querySelectorAll<HTMLElement>("li[data-index]").forEach((item) => {
    item.addEventListener("click", () => {
      const entry = history.list()[Number(item.dataset.index)];
      if (entry) renderResponse(entry.response);
    });
  });
}

async function submit(): Promise<void> {
  if (inFlight) return;
  const input = el<HTMLInputElement>("question");
  const question = input.value.trim();
  if (!question) return;
  hideBanner();
  setBusy(true);
  el("result-view").innerHTML = "";
  try {
    const response = await askQuestion(question);
    history.add(question, response);
    renderResponse(response);
  } catch (error) {
    if (error instanceof ApiError) {
      const trace = error.body.detail?.trace;
      if (error.status === 422 && trace) {
        const panel = el("trace-panel");
        panel.innerHTML =
          `<div class="warning">${escapeHtml(error.body.message)}</div>` + renderTrace(trace);
        attachCopyHandlers(panel);
      } else {
        showBanner(`request failed: ${error.message}`);
      }
    } else {
      showBanner("network failure: the service is unreachable", () => void submit());
    }
  } finally {
    setBusy(false);
  }
}

function boot(): void {
  el("ask-form").addEventListener("submit", (event) => {
    event.preventDefault();
    void submit();
  });
  void getHealth()
    .then((health) => {
      el("health").textContent =
        `service ${health.status} · llm ${health.llm} · ${health.templates} templates`;
    })
    .catch(() => {
      el("health").textContent = "service unreachable";
    });
}

document.addEventListener("DOMContentLoaded", boot);

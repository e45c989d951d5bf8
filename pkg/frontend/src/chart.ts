// SVG chart rendering from a declarative spec. Pure string builders so the
// renderer is testable without a DOM; tooltips are native SVG <title> elements
// carrying the raw cell values.

import { cellNumber, cellText, cellTime, escapeHtml } from "./results.js";
import { renderResultsTable } from "./table.js";
import type { ChartSpec, SparqlResults } from "./types.js";

export type RenderedView = { html: string; warning?: string };

const WIDTH = 680;
const HEIGHT = 400;
const MARGIN = { top: 48, right: 24, bottom: 56, left: 64 };
const PLOT_W = WIDTH - MARGIN.left - MARGIN.right;
const PLOT_H = HEIGHT - MARGIN.top - MARGIN.bottom;

const PALETTE = ["#2563eb", "#059669", "#d97706", "#dc2626", "#7c3aed", "#0d9488", "#6366f1", "#f59e0b"];

const CHART_KINDS = new Set(["bar", "line", "scatter", "violin", "box", "pie", "table"]);

type Pair = { x: string; xNum: number | null; y: number; rawY: string };

function collectPairs(spec: ChartSpec, results: SparqlResults, yName: string): Pair[] {
  const pairs: Pair[] = [];
  for (const row of results.results.bindings) {
    const xCell = spec.x ? row[spec.x] : undefined;
    const yCell = row[yName];
    const y = cellNumber(yCell);
    if (!xCell || y === null) continue;
    pairs.push({
      x: cellText(xCell),
      xNum: cellNumber(xCell) ?? cellTime(xCell),
      y,
      rawY: cellText(yCell),
    });
  }
  return pairs;
}

function extent(values: number[]): [number, number] {
  let lo = Math.min(...values);
  let hi = Math.max(...values);
  if (lo === hi) {
    lo -= 1;
    hi += 1;
  }
  return [lo, hi];
}

function scale(domain: [number, number], range: [number, number]) {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  return (v: number) => r0 + ((v - d0) / (d1 - d0)) * (r1 - r0);
}

function svgOpen(title: string): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${WIDTH} ${HEIGHT}" ` +
    `class="chart" role="img">` +
    `<text x="${WIDTH / 2}" y="24" text-anchor="middle" class="chart-title">` +
    `${escapeHtml(title)}</text>`
  );
}

function axes(xLabel: string, yLabel: string): string {
  const x0 = MARGIN.left;
  const y0 = MARGIN.top + PLOT_H;
  return (
    `<line x1="${x0}" y1="${y0}" x2="${x0 + PLOT_W}" y2="${y0}" class="axis"/>` +
    `<line x1="${x0}" y1="${MARGIN.top}" x2="${x0}" y2="${y0}" class="axis"/>` +
    `<text x="${x0 + PLOT_W / 2}" y="${HEIGHT - 12}" text-anchor="middle" class="axis-label">` +
    `${escapeHtml(xLabel)}</text>` +
    `<text x="16" y="${MARGIN.top + PLOT_H / 2}" text-anchor="middle" class="axis-label" ` +
    `transform="rotate(-90 16 ${MARGIN.top + PLOT_H / 2})">${escapeHtml(yLabel)}</text>`
  );
}

function yTicks(toY: (v: number) => number, domain: [number, number]): string {
  const [lo, hi] = domain;
  let out = "";
  for (let i = 0; i <= 4; i++) {
    const value = lo + ((hi - lo) * i) / 4;
    const y = toY(value);
    out +=
      `<line x1="${MARGIN.left - 4}" y1="${y}" x2="${MARGIN.left}" y2="${y}" class="axis"/>` +
      `<text x="${MARGIN.left - 8}" y="${y + 4}" text-anchor="end" class="tick">` +
      `${escapeHtml(formatNumber(value))}</text>`;
  }
  return out;
}

function formatNumber(value: number): string {
  if (Number.isInteger(value)) return String(value);
  return value.toPrecision(4).replace(/\.?0+$/, "");
}

// -- per-kind renderers -------------------------------------------------------

function renderBar(spec: ChartSpec, results: SparqlResults): string {
  const pairs = collectPairs(spec, results, spec.y[0]);
  const [, hi] = extent(pairs.map((p) => p.y).concat([0]));
  const toY = scale([Math.min(0, ...pairs.map((p) => p.y)), hi], [MARGIN.top + PLOT_H, MARGIN.top]);
  const band = PLOT_W / Math.max(pairs.length, 1);
  let out = svgOpen(spec.title) + axes(spec.x_label || spec.x || "", spec.y_label || spec.y[0]);
  out += yTicks(toY, [Math.min(0, ...pairs.map((p) => p.y)), hi]);
  pairs.forEach((pair, i) => {
    const x = MARGIN.left + i * band + band * 0.15;
    const y = toY(pair.y);
    const base = toY(0);
    out +=
      `<rect x="${x}" y="${Math.min(y, base)}" width="${band * 0.7}" ` +
      `height="${Math.abs(base - y)}" fill="${PALETTE[i % PALETTE.length]}" class="bar">` +
      `<title>${escapeHtml(pair.x)}: ${escapeHtml(pair.rawY)}</title></rect>` +
      `<text x="${x + band * 0.35}" y="${MARGIN.top + PLOT_H + 16}" text-anchor="middle" class="tick">` +
      `${escapeHtml(pair.x.length > 14 ? pair.x.slice(0, 13) + "…" : pair.x)}</text>`;
  });
  return out + "</svg>";
}

function renderLineOrScatter(spec: ChartSpec, results: SparqlResults, kind: "line" | "scatter"): string {
  let out = svgOpen(spec.title) + axes(spec.x_label || spec.x || "", spec.y_label || spec.y.join(", "));
  const seriesList = spec.y.map((name) => collectPairs(spec, results, name));
  const allX = seriesList.flat().map((p) => p.xNum ?? 0);
  const allY = seriesList.flat().map((p) => p.y);
  if (!allX.length) return out + "</svg>";
  const xDomain = extent(allX);
  const yDomain = extent(allY);
  const toX = scale(xDomain, [MARGIN.left, MARGIN.left + PLOT_W]);
  const toY = scale(yDomain, [MARGIN.top + PLOT_H, MARGIN.top]);
  out += yTicks(toY, yDomain);
  seriesList.forEach((pairs, s) => {
    const color = PALETTE[s % PALETTE.length];
    const sorted = [...pairs].sort((a, b) => (a.xNum ?? 0) - (b.xNum ?? 0));
    if (kind === "line" && sorted.length > 1) {
      const points = sorted.map((p) => `${toX(p.xNum ?? 0)},${toY(p.y)}`).join(" ");
      out += `<polyline points="${points}" fill="none" stroke="${color}" stroke-width="2" class="series"/>`;
    }
    for (const p of sorted) {
      out +=
        `<circle cx="${toX(p.xNum ?? 0)}" cy="${toY(p.y)}" r="${kind === "line" ? 3 : 4}" ` +
        `fill="${color}" class="dot"><title>${escapeHtml(p.x)}: ${escapeHtml(p.rawY)}</title></circle>`;
    }
  });
  return out + "</svg>";
}

function renderPie(spec: ChartSpec, results: SparqlResults): string {
  const pairs = collectPairs(spec, results, spec.y[0]).filter((p) => p.y > 0);
  const total = pairs.reduce((acc, p) => acc + p.y, 0);
  const cx = WIDTH / 2;
  const cy = MARGIN.top + PLOT_H / 2;
  const r = Math.min(PLOT_W, PLOT_H) / 2.4;
  let out = svgOpen(spec.title);
  let angle = -Math.PI / 2;
  pairs.forEach((pair, i) => {
    const slice = total > 0 ? (pair.y / total) * 2 * Math.PI : 0;
    const x1 = cx + r * Math.cos(angle);
    const y1 = cy + r * Math.sin(angle);
    angle += slice;
    const x2 = cx + r * Math.cos(angle);
    const y2 = cy + r * Math.sin(angle);
    const large = slice > Math.PI ? 1 : 0;
    const mid = angle - slice / 2;
    out +=
      `<path d="M ${cx} ${cy} L ${x1} ${y1} A ${r} ${r} 0 ${large} 1 ${x2} ${y2} Z" ` +
      `fill="${PALETTE[i % PALETTE.length]}" class="slice">` +
      `<title>${escapeHtml(pair.x)}: ${escapeHtml(pair.rawY)}</title></path>` +
      `<text x="${cx + (r + 18) * Math.cos(mid)}" y="${cy + (r + 18) * Math.sin(mid)}" ` +
      `text-anchor="middle" class="tick">${escapeHtml(pair.x)}</text>`;
  });
  return out + "</svg>";
}

function quantile(sorted: number[], q: number): number {
  if (!sorted.length) return 0;
  const pos = (sorted.length - 1) * q;
  const lo = Math.floor(pos);
  const hi = Math.ceil(pos);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo);
}

function groupByCategory(spec: ChartSpec, results: SparqlResults): Map<string, Pair[]> {
  const groups = new Map<string, Pair[]>();
  for (const pair of collectPairs(spec, results, spec.y[0])) {
    const list = groups.get(pair.x) ?? [];
    list.push(pair);
    groups.set(pair.x, list);
  }
  return groups;
}

function renderBoxOrViolin(spec: ChartSpec, results: SparqlResults, kind: "box" | "violin"): string {
  const groups = groupByCategory(spec, results);
  const all = [...groups.values()].flat().map((p) => p.y);
  let out = svgOpen(spec.title) + axes(spec.x_label || spec.x || "", spec.y_label || spec.y[0]);
  if (!all.length) return out + "</svg>";
  const yDomain = extent(all);
  const toY = scale(yDomain, [MARGIN.top + PLOT_H, MARGIN.top]);
  out += yTicks(toY, yDomain);
  const names = [...groups.keys()];
  const band = PLOT_W / Math.max(names.length, 1);
  names.forEach((name, i) => {
    const values = groups.get(name)!.map((p) => p.y).sort((a, b) => a - b);
    const center = MARGIN.left + i * band + band / 2;
    const color = PALETTE[i % PALETTE.length];
    const tooltip =
      `<title>${escapeHtml(name)}: n=${values.length}, ` +
      `min=${formatNumber(values[0])}, median=${formatNumber(quantile(values, 0.5))}, ` +
      `max=${formatNumber(values[values.length - 1])}</title>`;
    if (kind === "box") {
      const [q1, q2, q3] = [quantile(values, 0.25), quantile(values, 0.5), quantile(values, 0.75)];
      const w = band * 0.4;
      out +=
        `<g class="box">${tooltip}` +
        `<line x1="${center}" y1="${toY(values[0])}" x2="${center}" y2="${toY(values[values.length - 1])}" stroke="${color}"/>` +
        `<rect x="${center - w / 2}" y="${toY(q3)}" width="${w}" height="${Math.max(toY(q1) - toY(q3), 1)}" ` +
        `fill="${color}" fill-opacity="0.35" stroke="${color}"/>` +
        `<line x1="${center - w / 2}" y1="${toY(q2)}" x2="${center + w / 2}" y2="${toY(q2)}" ` +
        `stroke="${color}" stroke-width="2"/></g>`;
    } else {
      // violin: mirrored binned density silhouette
      const bins = 9;
      const [lo, hi] = [values[0], values[values.length - 1]];
      const span = hi - lo || 1;
      const counts = new Array(bins).fill(0);
      for (const v of values) {
        const bin = Math.min(bins - 1, Math.floor(((v - lo) / span) * bins));
        counts[bin] += 1;
      }
      const peak = Math.max(...counts, 1);
      const half = band * 0.35;
      const left: string[] = [];
      const right: string[] = [];
      for (let b = 0; b < bins; b++) {
        const value = lo + (span * (b + 0.5)) / bins;
        const w = (counts[b] / peak) * half;
        right.push(`${center + w},${toY(value)}`);
        left.unshift(`${center - w},${toY(value)}`);
      }
      out +=
        `<g class="violin">${tooltip}` +
        `<polygon points="${center},${toY(lo)} ${right.join(" ")} ${center},${toY(hi)} ${left.join(" ")}" ` +
        `fill="${color}" fill-opacity="0.45" stroke="${color}"/></g>`;
    }
    out +=
      `<text x="${center}" y="${MARGIN.top + PLOT_H + 16}" text-anchor="middle" class="tick">` +
      `${escapeHtml(name.length > 14 ? name.slice(0, 13) + "…" : name)}</text>`;
  });
  return out + "</svg>";
}

// -- entry point -----------------------------------------------------------------

function specUsable(spec: ChartSpec, results: SparqlResults): string | null {
  if (!CHART_KINDS.has(spec.kind)) return `unknown chart kind "${spec.kind}"`;
  if (spec.kind === "table") return null;
  const vars = results.head.vars;
  if (!spec.x || !vars.includes(spec.x)) return `x column "${spec.x}" not in results`;
  if (!spec.y.length) return "no y columns in spec";
  for (const name of spec.y) {
    if (!vars.includes(name)) return `y column "${name}" not in results`;
  }
  return null;
}

/** Renders the spec into SVG, or falls back to a table with a warning. */
export function renderView(spec: ChartSpec | null, results: SparqlResults): RenderedView {
  if (!spec || spec.kind === "table") {
    return { html: renderResultsTable(results) };
  }
  const problem = specUsable(spec, results);
  if (problem) {
    return { html: renderResultsTable(results), warning: `showing table instead: ${problem}` };
  }
  switch (spec.kind) {
    case "bar":
      return { html: renderBar(spec, results) };
    case "line":
      return { html: renderLineOrScatter(spec, results, "line") };
    case "scatter":
      return { html: renderLineOrScatter(spec, results, "scatter") };
    case "pie":
      return { html: renderPie(spec, results) };
    case "box":
      return { html: renderBoxOrViolin(spec, results, "box") };
    case "violin":
      return { html: renderBoxOrViolin(spec, results, "violin") };
    default:
      return { html: renderResultsTable(results), warning: `showing table instead: unhandled kind` };
  }
}

import { describe, expect, it } from "vitest";

import { renderTrace } from "../src/trace.js";
import type { Trace } from "../src/types.js";

const EXHAUSTED: Trace = {
  attempts: [
    { query: "junk one", validation: "no SPARQL query found in model output", execution: null, duration: 0.012 },
    { query: "SELECT ?s WHERE { ?s ?p", validation: "syntax error at 22: unbalanced braces: expected '}'", execution: null, duration: 0.009 },
    { query: "still junk", validation: "no SPARQL query found in model output", execution: null, duration: 0.011 },
  ],
  outcome: "EXHAUSTED",
  final_query: null,
};

const SUCCESS: Trace = {
  attempts: [
    { query: "SELECT ?s WHERE { ?s ?p ?o }", validation: null, execution: null, duration: 0.02 },
  ],
  outcome: "SUCCESS",
  final_query: "SELECT ?s WHERE { ?s ?p ?o }",
};

describe("renderTrace", () => {
  it("shows one card per attempt for a 3-attempt EXHAUSTED trace", () => {
    const html = renderTrace(EXHAUSTED);
    expect(html.match(/attempt \d/g)).toHaveLength(3);
    expect(html).toContain("EXHAUSTED");
    expect(html).toContain("badge-fail");
    expect(html.match(/attempt-failed/g)).toHaveLength(3);
  });

  it("shows per-attempt validation errors and durations", () => {
    const html = renderTrace(EXHAUSTED);
    expect(html).toContain("unbalanced braces");
    expect(html).toContain("12.0 ms");
  });

  it("marks a single-attempt success with a green badge", () => {
    const html = renderTrace(SUCCESS);
    expect(html.match(/attempt \d/g)).toHaveLength(1);
    expect(html).toContain("badge-ok");
    expect(html).toContain("validated and executed");
  });

  it("exposes the exact final query on the copy button", () => {
    const html = renderTrace(SUCCESS);
    expect(html).toContain('data-copy="SELECT ?s WHERE { ?s ?p ?o }"');
  });

  it("omits the final-query block when generation never succeeded", () => {
    expect(renderTrace(EXHAUSTED)).not.toContain("final query");
  });

  it("syntax-highlights queries and escapes content", () => {
    const html = renderTrace(SUCCESS);
    expect(html).toContain('<span class="kw">SELECT</span>');
    expect(html).toContain('<span class="var">?s</span>');
    const hostile = renderTrace({
      attempts: [{ query: "<img src=x>", validation: "err", execution: null, duration: 0 }],
      outcome: "EXHAUSTED",
      final_query: null,
    });
    expect(hostile).not.toContain("<img");
  });
});

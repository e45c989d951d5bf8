import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiError, askQuestion, getHealth, setApiBase } from "../src/api.js";

const ASK_RESPONSE = {
  sparql: "SELECT ?s WHERE { ?s ?p ?o }",
  trace: { attempts: [], outcome: "SUCCESS", final_query: "SELECT ?s WHERE { ?s ?p ?o }" },
  results: { head: { vars: ["s"] }, results: { bindings: [] } },
  representation: "TABLE",
  chart_spec: null,
  summary: { row_count: 0, columns: [] },
};

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("askQuestion", () => {
  it("posts the question to /api/ask and returns the parsed response", async () => {
    const fetchMock = vi.fn(async (url: RequestInfo | URL, init?: RequestInit) => {
      expect(String(url)).toBe("http://svc.test/api/ask");
      expect(init?.method).toBe("POST");
      expect(JSON.parse(String(init?.body))).toEqual({ question: "hello" });
      return jsonResponse(200, ASK_RESPONSE);
    });
    vi.stubGlobal("fetch", fetchMock);
    setApiBase("http://svc.test/");
    const response = await askQuestion("hello");
    expect(response.trace.outcome).toBe("SUCCESS");
    expect(fetchMock).toHaveBeenCalledOnce();
  });

  it("passes overrides through", async () => {
    const fetchMock = vi.fn(async (_url: RequestInfo | URL, init?: RequestInit) => {
      expect(JSON.parse(String(init?.body)).overrides).toEqual({ max_attempts: 2 });
      return jsonResponse(200, ASK_RESPONSE);
    });
    vi.stubGlobal("fetch", fetchMock);
    setApiBase("http://svc.test");
    await askQuestion("hello", { max_attempts: 2 });
  });

  it("raises ApiError carrying the trace for 422 exhaustion", async () => {
    const body = {
      code: "generation_exhausted",
      message: "no valid query after 3 attempts",
      detail: {
        trace: {
          attempts: [
            { query: "a", validation: "e", execution: null, duration: 0 },
            { query: "b", validation: "e", execution: null, duration: 0 },
            { query: "c", validation: "e", execution: null, duration: 0 },
          ],
          outcome: "EXHAUSTED",
          final_query: null,
        },
      },
    };
    vi.stubGlobal("fetch", vi.fn(async () => jsonResponse(422, body)));
    setApiBase("http://svc.test");
    const error = await askQuestion("q").catch((e) => e);
    expect(error).toBeInstanceOf(ApiError);
    expect(error.status).toBe(422);
    expect(error.body.detail.trace.attempts).toHaveLength(3);
  });

  it("propagates network failures as-is", async () => {
    vi.stubGlobal("fetch", vi.fn(async () => {
      throw new TypeError("fetch failed");
    }));
    setApiBase("http://svc.test");
    await expect(askQuestion("q")).rejects.toBeInstanceOf(TypeError);
  });
});

describe("getHealth", () => {
  it("parses the health document", async () => {
    vi.stubGlobal("fetch", vi.fn(async () =>
      jsonResponse(200, { status: "ok", sparql_endpoint: "ok", llm: "mock", templates: 24, warnings: [] }),
    ));
    setApiBase("http://svc.test");
    const health = await getHealth();
    expect(health.llm).toBe("mock");
    expect(health.templates).toBe(24);
  });
});

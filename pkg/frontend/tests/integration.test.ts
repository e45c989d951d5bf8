// Round trip against the real service running with mock gateways: spawn the
// Python process, load the mini knowledge graph over /api/etl, ask a question.

import { spawn, type ChildProcess } from "node:child_process";
import { fileURLToPath } from "node:url";
import { dirname, join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { askQuestion, getHealth, setApiBase } from "../src/api.js";

const ROOT = join(dirname(fileURLToPath(import.meta.url)), "..", "..");
const DATA = join(ROOT, "data");
const PORT = 8947;
const BASE = `http://127.0.0.1:${PORT}`;

let service: ChildProcess | null = null;

async function waitForHealth(timeoutMs = 30_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  let lastError: unknown = null;
  while (Date.now() < deadline) {
    try {
      const health = await getHealth();
      if (health.status === "ok") return;
    } catch (error) {
      lastError = error;
    }
    await new Promise((resolve) => setTimeout(resolve, 300));
  }
  throw new Error(`service did not become healthy: ${lastError}`);
}

beforeAll(async () => {
  setApiBase(BASE);
  service = spawn("python3", ["-m", "sparqllm.cli", "serve"], {
    cwd: ROOT,
    env: {
      ...process.env,
      SPARQLLM_LISTEN: `127.0.0.1:${PORT}`,
      SPARQLLM_TEMPLATES: join(DATA, "corpus.jsonl"),
      SPARQLLM_ONTOLOGY: join(DATA, "ontology.json"),
      SPARQLLM_MODE: "description",
      SPARQLLM_METRIC: "cosine",
      SPARQLLM_MOCK_REPLAY: join(DATA, "replay", "ask_happy.json"),
    },
    stdio: "ignore",
  });
  await waitForHealth();
  for (const name of ["platforms", "properties", "sensors", "observations"]) {
    const response = await fetch(`${BASE}/api/etl`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({
        csv_path: join(DATA, "minikg", `${name}.csv`),
        mapping_path: join(DATA, "minikg", `mapping_${name}.json`),
      }),
    });
    expect(response.status).toBe(200);
  }
}, 60_000);

afterAll(() => {
  service?.kill("SIGTERM");
});

describe("service round trip", () => {
  it("completes an ask against the running service with mock gateways", async () => {
    const response = await askQuestion(
      "What is the measured numeric reading of each recorded observation?",
    );
    expect(response.trace.outcome).toBe("SUCCESS");
    expect(response.trace.attempts).toHaveLength(1);
    expect(response.results.head.vars).toEqual(["observation", "value"]);
    expect(response.results.results.bindings).toHaveLength(6);
    expect(["PLOT", "TABLE"]).toContain(response.representation);
    expect(response.summary.row_count).toBe(6);
  }, 30_000);

  it("reports healthy dependencies", async () => {
    const health = await getHealth();
    expect(health.sparql_endpoint).toBe("ok");
    expect(health.llm).toBe("mock");
    expect(health.templates).toBe(24);
  });
});

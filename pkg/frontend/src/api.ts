// Thin client for the service API. The base URL is configurable at build/boot
// time via window.SPARQLLM_API_BASE (set it before loading main.js).

import type { ApiErrorBody, AskResponse, HealthResponse } from "./types.js";

declare global {
  // eslint-disable-next-line no-var
  var SPARQLLM_API_BASE: string | undefined;
}

let apiBase: string =
  (typeof globalThis !== "undefined" && globalThis.SPARQLLM_API_BASE) || "http://127.0.0.1:8000";

export function setApiBase(base: string): void {
  apiBase = base.replace(/\/+$/, "");
}

export function getApiBase(): string {
  return apiBase;
}

/** Raised for non-2xx responses that carry a structured error body. */
export class ApiError extends Error {
  readonly status: number;
  readonly body: ApiErrorBody;

  constructor(status: number, body: ApiErrorBody) {
    super(`${body.code}: ${body.message}`);
    this.status = status;
    this.body = body;
  }
}

async function parseError(response: Response): Promise<ApiError> {
  let body: ApiErrorBody;
  try {
    body = (await response.json()) as ApiErrorBody;
  } catch {
    body = { code: `http_${response.status}`, message: response.statusText };
  }
  return new ApiError(response.status, body);
}

export async function askQuestion(
  question: string,
  overrides?: { n_templates?: number; max_attempts?: number },
): Promise<AskResponse> {
  const response = await fetch(`${apiBase}/api/ask`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(overrides ? { question, overrides } : { question }),
  });
  if (!response.ok) {
    throw await parseError(response);
  }
  return (await response.json()) as AskResponse;
}

export async function getHealth(): Promise<HealthResponse> {
  const response = await fetch(`${apiBase}/api/health`);
  if (!response.ok) {
    throw await parseError(response);
  }
  return (await response.json()) as HealthResponse;
}

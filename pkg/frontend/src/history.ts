// Append-only session history of asked questions and their responses.

import type { AskResponse } from "./types.js";

export type HistoryEntry = {
  question: string;
  response: AskResponse;
  timestamp: number;
};

export class SessionHistory {
  private readonly entries: HistoryEntry[] = [];

  add(question: string, response: AskResponse, timestamp = Date.now()): HistoryEntry {
    const entry = { question, response, timestamp };
    this.entries.push(entry);
    return entry;
  }

  list(): readonly HistoryEntry[] {
    return this.entries;
  }

  get length(): number {
    return this.entries.length;
  }
}

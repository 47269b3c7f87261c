// Shared fixtures: a worked session (claim + attacker + supporter) and a
// fetch stub that the app talks to instead of a live service.

import { vi } from "vitest";
import type { EdgeView, QbafView, SessionView } from "../src/types.js";

export function workedQbaf(extraEdges: EdgeView[] = [], extraArguments = [] as QbafView["arguments"]): QbafView {
  return {
    version: 1,
    root: "a0",
    arguments: [
      { id: "a0", text: "the claim", base_score: 0.5, provenance: "claim" },
      { id: "a1", text: "evidence against", base_score: 0.8, provenance: "llm-generated" },
      { id: "a2", text: "evidence for", base_score: 0.4, provenance: "llm-generated" },
      ...extraArguments,
    ],
    edges: [
      { source: "a1", target: "a0", polarity: "attack" },
      { source: "a2", target: "a0", polarity: "support" },
      ...extraEdges,
    ],
  };
}

export function workedSession(overrides: Partial<SessionView> = {}): SessionView {
  return {
    id: "s1",
    revision: 3,
    settings: {
      semantics: "df-quad",
      depth: 2,
      breadth: 1,
      backend: {
        kind: "mock",
        endpoint_url: "",
        model: "",
        api_key: "",
        temperature: 0,
        timeout: 30,
        mock_seed: 0,
      },
    },
    qbaf: workedQbaf(),
    strengths: { a0: 0.3, a1: 0.8, a2: 0.4 },
    verdict: { root_strength: 0.3, label: "reject" },
    score_flags: {},
    documents: [],
    chat: [{ role: "user", text: "the claim", ts: "2026-01-01T00:00:00+00:00" }],
    ...overrides,
  };
}

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

export interface RecordedCall {
  url: string;
  method: string;
  body: unknown;
}

/** Install a fetch stub; each call pops the next queued response. */
export function stubFetch(queue: (Response | (() => Response))[]): RecordedCall[] {
  const calls: RecordedCall[] = [];
  vi.stubGlobal(
    "fetch",
    vi.fn(async (url: string, init?: RequestInit) => {
      let body: unknown = null;
      if (typeof init?.body === "string") {
        body = JSON.parse(init.body);
      } else if (init?.body instanceof FormData) {
        body = "form-data";
      }
      calls.push({ url: String(url), method: init?.method ?? "GET", body });
      const next = queue.shift();
      if (!next) throw new Error(`unexpected fetch: ${url}`);
      return typeof next === "function" ? next() : next;
    }),
  );
  return calls;
}

export async function flush(): Promise<void> {
  await new Promise((resolve) => setTimeout(resolve, 0));
  await new Promise((resolve) => setTimeout(resolve, 0));
}

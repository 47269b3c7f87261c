// Thin typed client over the session service JSON API.  All state lives
// server-side; this module never computes strengths or verdicts.

import type {
  AddArgumentResponse,
  ChatResponse,
  PatchScoreResponse,
  Polarity,
  SessionEnvelope,
  UploadResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
    public field?: string,
  ) {
    super(message);
  }
}

export class ApiClient {
  constructor(private baseUrl: string = "") {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await fetch(this.baseUrl + path, init);
    } catch (err) {
      throw new ApiError(0, "network", `cannot reach the service: ${err}`);
    }
    if (response.status === 204) {
      return undefined as T;
    }
    const body = await response.json().catch(() => ({}));
    if (!response.ok) {
      throw new ApiError(response.status, body.code ?? "error", body.message ?? response.statusText, body.field);
    }
    return body as T;
  }

  private json(method: string, payload: unknown): RequestInit {
    return {
      method,
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    };
  }

  createSession(): Promise<SessionEnvelope> {
    return this.request("/sessions", { method: "POST" });
  }

  getSession(id: string): Promise<SessionEnvelope> {
    return this.request(`/sessions/${id}`);
  }

  deleteSession(id: string): Promise<void> {
    return this.request(`/sessions/${id}`, { method: "DELETE" });
  }

  putSettings(id: string, settings: unknown): Promise<SessionEnvelope> {
    return this.request(`/sessions/${id}/settings`, this.json("PUT", settings));
  }

  submitClaim(id: string, text: string): Promise<SessionEnvelope> {
    return this.request(`/sessions/${id}/claim`, this.json("POST", { text }));
  }

  patchScore(id: string, argumentId: string, value: number): Promise<PatchScoreResponse> {
    return this.request(`/sessions/${id}/arguments/${argumentId}`, this.json("PATCH", { base_score: value }));
  }

  addArgument(
    id: string,
    payload: { parent: string; polarity: Polarity; mode: "manual" | "generate"; text?: string; base_score?: number },
  ): Promise<AddArgumentResponse> {
    return this.request(`/sessions/${id}/arguments`, this.json("POST", payload));
  }

  postChat(id: string, message: string): Promise<ChatResponse> {
    return this.request(`/sessions/${id}/chat`, this.json("POST", { message }));
  }

  uploadDocument(id: string, file: File): Promise<UploadResponse> {
    const form = new FormData();
    form.append("file", file, file.name);
    return this.request(`/sessions/${id}/documents`, { method: "POST", body: form });
  }
}

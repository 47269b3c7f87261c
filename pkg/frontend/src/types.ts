// Wire types mirroring the session service JSON schema.

export type Polarity = "attack" | "support";

export interface ArgumentView {
  id: string;
  text: string;
  base_score: number;
  provenance: string;
}

export interface EdgeView {
  source: string;
  target: string;
  polarity: Polarity;
}

export interface QbafView {
  version: number;
  root: string;
  arguments: ArgumentView[];
  edges: EdgeView[];
}

export interface BackendView {
  kind: string;
  endpoint_url: string;
  model: string;
  api_key: string;
  temperature: number;
  timeout: number;
  mock_seed: number;
  mock_script?: [string, string][];
}

export interface SettingsView {
  semantics: string;
  depth: number;
  breadth: number;
  backend: BackendView;
}

export interface DocumentView {
  id: string;
  filename: string;
  page_count: number;
  byte_size: number;
  uploaded_at: string;
  extraction_empty: boolean;
}

export interface ChatEntryView {
  role: string;
  text: string;
  ts: string;
}

export interface VerdictView {
  root_strength: number;
  label: "accept" | "reject" | "undecided";
}

export interface SessionView {
  id: string;
  revision: number;
  settings: SettingsView;
  qbaf: QbafView | null;
  strengths: Record<string, number> | null;
  verdict: VerdictView | null;
  score_flags: Record<string, string>;
  documents: DocumentView[];
  chat: ChatEntryView[];
}

export interface SessionEnvelope {
  session: SessionView;
}

export interface PatchScoreResponse extends SessionEnvelope {
  root_strength_before: number;
  root_strength_after: number;
}

export interface AddArgumentResponse extends SessionEnvelope {
  argument_id: string;
}

export interface ChatResponse extends SessionEnvelope {
  reply: string;
  applied: { target: string; polarity: Polarity; argument_id: string }[];
}

export interface UploadResponse extends SessionEnvelope {
  document: DocumentView;
  warning?: string;
}

export const SEMANTICS_IDS = ["df-quad", "euler", "quadratic-energy"] as const;

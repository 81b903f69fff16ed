/** Wire types mirroring the triage API's JSON payloads. */

export interface MatchSpan {
  entry_id: number;
  start: number;
  end: number;
  surface: string;
}

export interface QueueMessage {
  id: string;
  text: string;
  lang: string;
  ts: string;
  author: string;
  reply_to: string | null;
  score: number;
  labels: string[];
  spans: MatchSpan[];
}

export interface Meme {
  id: string;
  style: "REPROACHING" | "RIDICULING" | "RECONCILING";
  captions: Record<string, string>;
  image: string | null;
}

export interface Suggestion {
  grammar_id: string;
  text: string;
  rank: number;
}

export interface TreeNode {
  q: string;
  options: Record<string, string>;
}

export interface Tree {
  id: string;
  lang: string;
  root: string;
  nodes: Record<string, TreeNode>;
}

/** Where the composer's text came from; drives response provenance. */
export type TextSource = "NONE" | "HUMAN" | "GENERATED" | "EDITED";

export interface ActRequest {
  action: "RESPOND" | "REPORT" | "IGNORE";
  actor: string;
  meme_id?: string;
  text?: string;
  text_source?: TextSource;
  grammar_id?: string;
  transcript?: string[];
}

export interface ActionRecord {
  id: string;
  message_id: string;
  action: string;
  payload: string | null;
  actor: string;
  at: string;
}

export interface EngagementCell {
  posts: number;
  liked_posts: number;
  rate: number | null;
}

export interface EngagementStats {
  group: string;
  rates: Record<string, EngagementCell>;
}

export interface TimeseriesStats {
  lang: string;
  label: string | null;
  days: Record<string, number>;
  peaks: { day: string; count: number; z: number }[];
}

export interface GrammarPreview {
  count: number;
  samples: string[];
}

export interface GrammarDraft {
  id: string;
  lang: string;
  tone: string;
  columns: string[][];
}

export class ApiConflictError extends Error {
  constructor(detail: string) {
    super(detail);
    this.name = "ApiConflictError";
  }
}

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
    this.name = "ApiError";
  }
}

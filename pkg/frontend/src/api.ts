/** Thin typed client over the triage HTTP API.
 *
 * Every number shown in the UI comes from these calls; the client adds no
 * scoring, ranking, or rate math of its own. The fetch implementation is
 * injectable so tests can run against an in-memory mock.
 */

import {
  ActionRecord,
  ActRequest,
  ApiConflictError,
  ApiError,
  EngagementStats,
  GrammarDraft,
  GrammarPreview,
  Meme,
  QueueMessage,
  Suggestion,
  TimeseriesStats,
  Tree,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface ApiClientOptions {
  baseUrl?: string;
  token?: string;
  fetchImpl?: FetchLike;
}

export class ApiClient {
  private readonly baseUrl: string;
  private readonly token?: string;
  private readonly fetchImpl: FetchLike;

  constructor(options: ApiClientOptions = {}) {
    this.baseUrl = (options.baseUrl ?? "").replace(/\/$/, "");
    this.token = options.token;
    this.fetchImpl = options.fetchImpl ?? fetch.bind(globalThis);
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const headers: Record<string, string> = {};
    if (body !== undefined) headers["Content-Type"] = "application/json";
    if (this.token) headers["X-API-Token"] = this.token;
    const res = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!res.ok) {
      const detail = await res
        .json()
        .then((doc: { detail?: string }) => doc.detail ?? res.statusText)
        .catch(() => res.statusText);
      if (res.status === 409) throw new ApiConflictError(detail);
      throw new ApiError(res.status, detail);
    }
    return (await res.json()) as T;
  }

  listMessages(lang: string, limit = 50): Promise<{ messages: QueueMessage[] }> {
    return this.request("GET", `/messages?lang=${encodeURIComponent(lang)}&limit=${limit}`);
  }

  act(messageId: string, body: ActRequest): Promise<ActionRecord> {
    return this.request("POST", `/messages/${encodeURIComponent(messageId)}/act`, body);
  }

  listMemes(): Promise<Meme[]> {
    return this.request("GET", "/memes");
  }

  suggestions(messageId: string, n = 5): Promise<Suggestion[]> {
    return this.request(
      "GET",
      `/suggestions?message_id=${encodeURIComponent(messageId)}&n=${n}`,
    );
  }

  previewGrammar(draft: GrammarDraft, n = 5): Promise<GrammarPreview> {
    return this.request("POST", "/grammars/preview", { ...draft, n });
  }

  publishGrammar(draft: GrammarDraft): Promise<{ id: string; count: number }> {
    return this.request("POST", "/grammars", draft);
  }

  tree(lang: string): Promise<Tree> {
    return this.request("GET", `/trees/${encodeURIComponent(lang)}`);
  }

  engagement(group: "meme" | "style" | "grammar" | "composition"): Promise<EngagementStats> {
    return this.request("GET", `/stats/engagement?group=${group}`);
  }

  timeseries(lang: string, label?: string): Promise<TimeseriesStats> {
    const suffix = label ? `&label=${encodeURIComponent(label)}` : "";
    return this.request("GET", `/stats/timeseries?lang=${encodeURIComponent(lang)}${suffix}`);
  }

  reportStats(): Promise<{ reports: number; ratio: number | null }> {
    return this.request("GET", "/stats/reports");
  }
}

// Thin client over the annotation panel's HTTP API. The service is the
// single source of truth; nothing is cached or persisted on this side.

import type {
  AnnotationAck,
  ExportResponse,
  NewSessionRequest,
  NewSessionResponse,
  NextResponse,
  ProgressResponse,
  VerdictCategory,
} from "./types.js";

export class PanelServiceError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`panel service replied ${status}: ${detail}`);
    this.name = "PanelServiceError";
  }
}

// The slice of the client the review controller needs; tests substitute fakes.
export interface PanelApi {
  fetchNext(sessionId: string, raterId: string): Promise<NextResponse>;
  submitAnnotation(
    sessionId: string,
    raterId: string,
    itemId: string,
    category: VerdictCategory,
  ): Promise<AnnotationAck>;
  fetchProgress(sessionId: string): Promise<ProgressResponse>;
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class PanelClient implements PanelApi {
  private readonly base: string;
  private readonly doFetch: FetchLike;

  constructor(baseUrl = "", fetchImpl?: FetchLike) {
    this.base = baseUrl.replace(/\/+$/, "");
    // Wrap the global so it keeps its own `this` in browsers.
    this.doFetch = fetchImpl ?? ((url, init) => fetch(url, init));
  }

  async fetchNext(sessionId: string, raterId: string): Promise<NextResponse> {
    const rater = encodeURIComponent(raterId);
    return this.request<NextResponse>(
      "GET",
      `/sessions/${encodeURIComponent(sessionId)}/next?rater=${rater}`,
    );
  }

  async submitAnnotation(
    sessionId: string,
    raterId: string,
    itemId: string,
    category: VerdictCategory,
  ): Promise<AnnotationAck> {
    return this.request<AnnotationAck>(
      "POST",
      `/sessions/${encodeURIComponent(sessionId)}/annotations`,
      { rater_id: raterId, item_id: itemId, category },
    );
  }

  async fetchProgress(sessionId: string): Promise<ProgressResponse> {
    return this.request<ProgressResponse>(
      "GET",
      `/sessions/${encodeURIComponent(sessionId)}/progress`,
    );
  }

  async fetchExport(sessionId: string): Promise<ExportResponse> {
    return this.request<ExportResponse>(
      "GET",
      `/sessions/${encodeURIComponent(sessionId)}/export`,
    );
  }

  async createSession(body: NewSessionRequest): Promise<NewSessionResponse> {
    return this.request<NewSessionResponse>("POST", "/sessions", body);
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.doFetch(this.base + path, init);
    if (!response.ok) {
      throw new PanelServiceError(response.status, await detailOf(response));
    }
    return (await response.json()) as T;
  }
}

async function detailOf(response: Response): Promise<string> {
  try {
    const payload = (await response.json()) as { detail?: unknown };
    if (typeof payload.detail === "string") return payload.detail;
    if (payload.detail !== undefined) return JSON.stringify(payload.detail);
    return JSON.stringify(payload);
  } catch {
    return response.statusText || "no detail";
  }
}

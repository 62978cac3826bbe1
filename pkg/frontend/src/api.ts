/** Typed client for the /v1 triage API.
 *
 * Two failure shapes, kept distinct on purpose: ApiError carries the server's
 * own error code and detail verbatim, ServiceUnreachable means the request
 * never produced an HTTP response. Callers decide what is retryable.
 */

import type {
  ArticleDetail,
  ArticleRecord,
  BatchAck,
  DecisionAck,
  DecisionBody,
  QueuePage,
  QueueStats,
} from "./types.js";
import type { QueueFilters } from "./urlstate.js";
import { queueQuery } from "./urlstate.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    readonly detail: string,
  ) {
    super(`${code}: ${detail}`);
    this.name = "ApiError";
  }
}

export class ServiceUnreachable extends Error {
  constructor(cause: unknown) {
    const reason = cause instanceof Error ? cause.message : String(cause);
    super(`service unreachable: ${reason}`);
    this.name = "ServiceUnreachable";
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface TriageClient {
  getQueue(filters: QueueFilters): Promise<QueuePage>;
  getArticle(articleId: string): Promise<ArticleDetail>;
  submitDecision(articleId: string, body: DecisionBody): Promise<DecisionAck>;
  getStats(): Promise<QueueStats>;
  enqueueBatch(articles: ArticleRecord[]): Promise<BatchAck>;
}

export function createClient(baseUrl: string, fetchImpl?: FetchLike): TriageClient {
  const doFetch: FetchLike = fetchImpl ?? ((url, init) => fetch(url, init));
  const base = baseUrl.replace(/\/$/, "");

  async function request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await doFetch(base + path, init);
    } catch (cause) {
      throw new ServiceUnreachable(cause);
    }
    if (!response.ok) {
      let code = "http_error";
      let detail = `${response.status} ${response.statusText}`.trim();
      try {
        const body = (await response.json()) as { error?: string; detail?: string };
        if (typeof body.error === "string") code = body.error;
        if (typeof body.detail === "string") detail = body.detail;
      } catch {
        // non-JSON error body, keep the status-line fallback
      }
      throw new ApiError(response.status, code, detail);
    }
    return (await response.json()) as T;
  }

  function postJson<T>(path: string, payload: unknown): Promise<T> {
    return request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  return {
    getQueue(filters: QueueFilters): Promise<QueuePage> {
      const params = queueQuery(filters).toString();
      return request<QueuePage>(`/v1/queue${params ? `?${params}` : ""}`);
    },

    getArticle(articleId: string): Promise<ArticleDetail> {
      return request<ArticleDetail>(`/v1/articles/${encodeURIComponent(articleId)}`);
    },

    submitDecision(articleId: string, body: DecisionBody): Promise<DecisionAck> {
      const payload: DecisionBody = { decision: body.decision, reviewer: body.reviewer };
      if (body.note !== undefined && body.note !== "") payload.note = body.note;
      return postJson<DecisionAck>(
        `/v1/articles/${encodeURIComponent(articleId)}/decision`,
        payload,
      );
    },

    getStats(): Promise<QueueStats> {
      return request<QueueStats>("/v1/stats");
    },

    enqueueBatch(articles: ArticleRecord[]): Promise<BatchAck> {
      return postJson<BatchAck>("/v1/batches", articles);
    },
  };
}

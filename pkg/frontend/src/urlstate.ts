/** Queue filters live in the address bar so any view can be shared by URL.
 *
 * The same parameter names travel to GET /v1/queue, so one round-trip format
 * covers both. Values that the server would reject (a mangled share link, a
 * stale rule name) are dropped here instead of bouncing off a 400.
 */

import type { Label, ReviewStatus, RuleId } from "./types.js";
import { LABELS, RULE_IDS, STATUSES } from "./types.js";

export const DEFAULT_PAGE_SIZE = 20;
export const MAX_PAGE_SIZE = 200;

export interface QueueFilters {
  status?: ReviewStatus;
  label?: Label;
  rule?: RuleId;
  page: number;
  pageSize: number;
}

/** Filters plus which article is open, the whole shareable view state. */
export interface PageState {
  filters: QueueFilters;
  article?: string;
}

export function defaultFilters(): QueueFilters {
  return { page: 1, pageSize: DEFAULT_PAGE_SIZE };
}

function pickOne<T extends string>(
  raw: string | null,
  allowed: readonly T[],
): T | undefined {
  return allowed.includes(raw as T) ? (raw as T) : undefined;
}

function clampInt(raw: string | null, fallback: number, lo: number, hi: number): number {
  const parsed = raw === null ? NaN : Number.parseInt(raw, 10);
  if (!Number.isFinite(parsed)) return fallback;
  return Math.min(hi, Math.max(lo, parsed));
}

export function parseFilters(params: URLSearchParams): QueueFilters {
  return {
    status: pickOne(params.get("status"), STATUSES),
    label: pickOne(params.get("label"), LABELS),
    rule: pickOne(params.get("rule"), RULE_IDS),
    page: clampInt(params.get("page"), 1, 1, Number.MAX_SAFE_INTEGER),
    pageSize: clampInt(params.get("page_size"), DEFAULT_PAGE_SIZE, 1, MAX_PAGE_SIZE),
  };
}

/** Defaults are omitted so shared links stay short and stable. */
export function queueQuery(filters: QueueFilters): URLSearchParams {
  const params = new URLSearchParams();
  if (filters.status) params.set("status", filters.status);
  if (filters.label) params.set("label", filters.label);
  if (filters.rule) params.set("rule", filters.rule);
  if (filters.page !== 1) params.set("page", String(filters.page));
  if (filters.pageSize !== DEFAULT_PAGE_SIZE) {
    params.set("page_size", String(filters.pageSize));
  }
  return params;
}

export function parsePageState(search: string): PageState {
  const params = new URLSearchParams(search);
  const article = params.get("article");
  return {
    filters: parseFilters(params),
    article: article === null || article === "" ? undefined : article,
  };
}

export function pageStateQuery(state: PageState): string {
  const params = queueQuery(state.filters);
  if (state.article) params.set("article", state.article);
  const text = params.toString();
  return text === "" ? "" : `?${text}`;
}

export function filtersEqual(a: QueueFilters, b: QueueFilters): boolean {
  return (
    a.status === b.status &&
    a.label === b.label &&
    a.rule === b.rule &&
    a.page === b.page &&
    a.pageSize === b.pageSize
  );
}

/** HTML renderers. Pure string in, string out, so every view is testable
 * without a browser. Numbers shown in the stats banner come from /v1/stats
 * verbatim, never recomputed from the visible page.
 */

import type { Segment } from "./highlight.js";
import type {
  ArticleDetail,
  QueuePage,
  QueueStats,
  TraceEntry,
  WorkItem,
} from "./types.js";
import type { OutboxEntry } from "./outbox.js";
import type { QueueFilters } from "./urlstate.js";
import { LABELS, RULE_IDS, STATUSES } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

function fmtScore(score: number | null): string {
  return score === null ? "-" : score.toFixed(4);
}

const LABEL_TEXT: Record<string, string> = {
  suspect_adverse: "suspect",
  not_suspect: "not suspect",
};

function labelBadge(label: string): string {
  const cls = label === "suspect_adverse" ? "badge-suspect" : "badge-clear";
  return `<span class="badge ${cls}">${escapeHtml(LABEL_TEXT[label] ?? label)}</span>`;
}

export function renderStatsBanner(stats: QueueStats): string {
  const digest = stats.bundle_digest === null ? "-" : stats.bundle_digest.slice(0, 12);
  const thresholds =
    stats.thresholds === null
      ? "-"
      : `a ${stats.thresholds.theta_a.toFixed(2)} / b ${stats.thresholds.theta_b.toFixed(2)}`;
  const count = (name: string, value: number, statPath: string) =>
    `<span class="stat"><span class="stat-label">${name}</span>` +
    `<span class="stat-value" data-stat="${statPath}">${value}</span></span>`;
  return `
    <div class="stats">
      ${count("total", stats.items.total, "items.total")}
      ${count("pending", stats.items.pending, "items.pending")}
      ${count("reviewed", stats.items.reviewed, "items.reviewed")}
      ${count("suspect", stats.labels.suspect_adverse, "labels.suspect_adverse")}
      ${count("not suspect", stats.labels.not_suspect, "labels.not_suspect")}
      ${count("decisions", stats.decisions_recorded, "decisions_recorded")}
      <span class="stat"><span class="stat-label">thresholds</span>
        <span class="stat-value">${escapeHtml(thresholds)}</span></span>
      <span class="stat"><span class="stat-label">bundle</span>
        <span class="stat-value mono" data-stat="bundle_digest">${escapeHtml(digest)}</span></span>
    </div>`;
}

export function renderFilterBar(filters: QueueFilters): string {
  const option = (value: string, text: string, selected: boolean) =>
    `<option value="${escapeHtml(value)}"${selected ? " selected" : ""}>${escapeHtml(text)}</option>`;
  const select = (name: string, current: string | undefined, values: readonly string[]) =>
    `<label class="filter">${escapeHtml(name)}
      <select data-filter="${escapeHtml(name)}">
        ${option("", "all", current === undefined)}
        ${values.map((v) => option(v, v, v === current)).join("")}
      </select>
    </label>`;
  return `
    <div class="filter-bar">
      ${select("status", filters.status, STATUSES)}
      ${select("label", filters.label, LABELS)}
      ${select("rule", filters.rule, RULE_IDS)}
    </div>`;
}

function queueRow(item: WorkItem, selected: boolean): string {
  const decided = item.decision === null ? "" : ` &middot; ${escapeHtml(item.decision.decision)}`;
  return `
    <tr class="queue-row${selected ? " selected" : ""}" data-article-id="${escapeHtml(item.article.id)}">
      <td class="mono">${escapeHtml(item.article.id)}</td>
      <td>${labelBadge(item.prediction.label)}</td>
      <td class="mono">${escapeHtml(item.prediction.fired_rule)}</td>
      <td class="mono">${fmtScore(item.prediction.score_a)}</td>
      <td class="mono">${fmtScore(item.prediction.score_b)}</td>
      <td>${escapeHtml(item.status)}${decided}</td>
      <td class="queue-title">${escapeHtml(item.article.title)}</td>
    </tr>`;
}

export function renderQueueTable(page: QueuePage, selectedId?: string): string {
  if (page.total === 0) {
    return `<div class="empty-state">No items match the current filters.</div>`;
  }
  return `
    <table class="queue">
      <thead>
        <tr><th>id</th><th>label</th><th>rule</th><th>score a</th><th>score b</th>
        <th>status</th><th>title</th></tr>
      </thead>
      <tbody>
        ${page.items.map((item) => queueRow(item, item.article.id === selectedId)).join("")}
      </tbody>
    </table>`;
}

export function renderPager(page: QueuePage): string {
  const pages = Math.max(1, Math.ceil(page.total / page.page_size));
  const prevOff = page.page <= 1 ? " disabled" : "";
  const nextOff = page.page >= pages ? " disabled" : "";
  return `
    <div class="pager">
      <button data-nav="prev"${prevOff}>&larr; prev</button>
      <span class="pager-text">Page ${page.page} of ${pages} (${page.total} items)</span>
      <button data-nav="next"${nextOff}>next &rarr;</button>
    </div>`;
}

/** Marks carry the absolute span offsets so the highlight ranges shown on
 * screen can be checked against the server's spans character for character. */
export function renderSegments(segments: Segment[]): string {
  return segments
    .map((segment) => {
      if (segment.kinds.length === 0) return escapeHtml(segment.text);
      const classes = segment.kinds.map((kind) => `hl-${kind}`).join(" ");
      return (
        `<mark class="${classes}" data-start="${segment.start}" data-end="${segment.end}">` +
        `${escapeHtml(segment.text)}</mark>`
      );
    })
    .join("");
}

export function renderTrace(trace: TraceEntry[]): string {
  const row = (entry: TraceEntry) => {
    const state = entry.fired ? "fired" : entry.evaluated ? "passed" : "skipped";
    return `
      <tr class="trace-row trace-${state}" data-rule="${escapeHtml(entry.rule_id)}">
        <td class="mono">${escapeHtml(entry.rule_id)}</td>
        <td data-trace-state="${state}">${state}</td>
        <td class="trace-detail">${escapeHtml(entry.detail)}</td>
      </tr>`;
  };
  return `
    <table class="trace">
      <thead><tr><th>rule</th><th>state</th><th>detail</th></tr></thead>
      <tbody>${trace.map(row).join("")}</tbody>
    </table>`;
}

function renderExplanationMeta(detail: ArticleDetail): string {
  if (detail.explanation === null) {
    return `<p class="no-explanation">No explanation: the article is outside the bundle envelope, so the scorers never ran.</p>`;
  }
  const top = detail.explanation.attributions
    .slice(0, 3)
    .map(
      (a) =>
        `<li>sentence ${a.sentence_index}: <span class="mono">${a.influence.toFixed(4)}</span></li>`,
    )
    .join("");
  return `
    <div class="explanation-meta">
      <span class="mono">${escapeHtml(detail.explanation.mode)}</span>,
      base score <span class="mono">${detail.explanation.base_score.toFixed(4)}</span>
      <ul class="influences">${top}</ul>
    </div>`;
}

function renderDecisionHistory(detail: ArticleDetail, decisionCount: number): string {
  if (detail.decision === null) return `<p class="history">No decisions yet.</p>`;
  const noun = decisionCount === 1 ? "decision" : "decisions";
  const note =
    detail.decision.note === null ? "" : ` &middot; &ldquo;${escapeHtml(detail.decision.note)}&rdquo;`;
  return `
    <p class="history" data-decision-count="${decisionCount}">
      ${decisionCount} ${noun} recorded. Latest:
      <strong>${escapeHtml(detail.decision.decision)}</strong>
      by ${escapeHtml(detail.decision.reviewer)}
      at <span class="mono">${escapeHtml(detail.decision.timestamp_utc)}</span>${note}
    </p>`;
}

export interface ArticleView {
  detail: ArticleDetail;
  titleSegments: Segment[];
  abstractSegments: Segment[];
  decisionCount: number;
  reviewer: string;
}

export function renderArticlePanel(view: ArticleView): string {
  const { detail } = view;
  return `
    <article class="article" data-article-id="${escapeHtml(detail.article.id)}">
      <header class="article-header">
        <span class="mono">${escapeHtml(detail.article.id)}</span>
        ${labelBadge(detail.prediction.label)}
        <span class="mono">${escapeHtml(detail.prediction.fired_rule)}</span>
        <span class="article-status">${escapeHtml(detail.status)}</span>
        <button class="close" data-action="close" title="Escape">&times;</button>
      </header>
      <h2 class="article-title">${renderSegments(view.titleSegments)}</h2>
      <p class="article-abstract" data-region="abstract">${renderSegments(view.abstractSegments)}</p>
      ${renderExplanationMeta(detail)}
      <h3>Rule trace</h3>
      ${renderTrace(detail.trace)}
      <h3>Decision</h3>
      ${renderDecisionHistory(detail, view.decisionCount)}
      <div class="decision-controls">
        <label>reviewer <input type="text" data-field="reviewer"
          value="${escapeHtml(view.reviewer)}"></label>
        <label>note <input type="text" data-field="note" placeholder="optional"></label>
        <button class="decide relevant" data-decision="relevant">relevant <kbd>r</kbd></button>
        <button class="decide not-relevant" data-decision="not_relevant">not relevant <kbd>n</kbd></button>
      </div>
    </article>`;
}

/** Blocking failure banner. The caller clears the queue and article panes
 * before showing it, stale data is worse than none. */
export function renderErrorBanner(detail: string): string {
  return `
    <div class="error-banner" role="alert">
      <strong>Service unavailable.</strong> ${escapeHtml(detail)}
      <button data-action="retry">Retry</button>
    </div>`;
}

export function renderOutboxTray(entries: readonly OutboxEntry[]): string {
  if (entries.length === 0) return "";
  const noun = entries.length === 1 ? "decision" : "decisions";
  const rows = entries
    .map(
      (e) =>
        `<li><span class="mono">${escapeHtml(e.articleId)}</span> ` +
        `${escapeHtml(e.body.decision)} (attempt ${e.attempts}): ${escapeHtml(e.error)}</li>`,
    )
    .join("");
  return `
    <div class="outbox-tray" role="status">
      <strong>${entries.length} ${noun} not yet delivered.</strong>
      <ul>${rows}</ul>
      <button data-action="flush-outbox">Retry now</button>
    </div>`;
}

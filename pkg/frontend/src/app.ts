/** Browser wiring: URL-driven state, keyboard-first review flow.
 *
 * All reads and writes go through the /v1 client; nothing is derived from
 * stale page content. Explanations arrive with the article detail, which is
 * only fetched when an article is opened.
 */

import { ApiError, createClient } from "./api.js";
import { buildArticleHighlights, reassemble } from "./highlight.js";
import { createOutbox } from "./outbox.js";
import type { ArticleDetail, Decision, QueuePage, QueueStats } from "./types.js";
import {
  renderArticlePanel,
  renderErrorBanner,
  renderFilterBar,
  renderOutboxTray,
  renderPager,
  renderQueueTable,
  renderStatsBanner,
} from "./render.js";
import type { PageState } from "./urlstate.js";
import { pageStateQuery, parsePageState } from "./urlstate.js";

const client = createClient("");
const outbox = createOutbox((id, body) => client.submitDecision(id, body));

interface AppState {
  page: PageState;
  queue: QueuePage | null;
  stats: QueueStats | null;
  detail: ArticleDetail | null;
  selected: number;
  error: string | null;
  notice: string | null;
}

const state: AppState = {
  page: parsePageState(window.location.search),
  queue: null,
  stats: null,
  detail: null,
  selected: 0,
  error: null,
  notice: null,
};

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing page element #${id}`);
  return node;
}

function reviewerName(): string {
  return window.localStorage.getItem("reviewer") ?? "screener";
}

function pushUrl(): void {
  const query = pageStateQuery(state.page);
  const next = query === "" ? window.location.pathname : query;
  if (window.location.search !== query) window.history.pushState(null, "", next);
}

function errorText(err: unknown): string {
  if (err instanceof ApiError) return `${err.code}: ${err.detail}`;
  return err instanceof Error ? err.message : String(err);
}

function render(): void {
  el("banner").innerHTML = state.error === null ? "" : renderErrorBanner(state.error);
  el("notice").textContent = state.notice ?? "";
  el("outbox").innerHTML = renderOutboxTray(outbox.list());
  el("stats").innerHTML = state.stats === null ? "" : renderStatsBanner(state.stats);
  el("filters").innerHTML = renderFilterBar(state.page.filters);

  if (state.error !== null) {
    // Blocking failure: never show a queue that may no longer be true.
    el("queue").innerHTML = "";
    el("pager").innerHTML = "";
    el("article").innerHTML = "";
    return;
  }

  const selectedId = state.queue?.items[state.selected]?.article.id;
  el("queue").innerHTML = state.queue === null ? "" : renderQueueTable(state.queue, selectedId);
  el("pager").innerHTML = state.queue === null ? "" : renderPager(state.queue);

  if (state.detail === null) {
    el("article").innerHTML = "";
  } else {
    const view = buildArticleHighlights(state.detail);
    const abstractText = reassemble(view.abstract);
    if (abstractText !== state.detail.article.abstract) {
      throw new Error("highlight segments do not reassemble to the abstract");
    }
    el("article").innerHTML = renderArticlePanel({
      detail: state.detail,
      titleSegments: view.title,
      abstractSegments: view.abstract,
      decisionCount: countDecisions(state.detail),
      reviewer: reviewerName(),
    });
  }
}

function countDecisions(detail: ArticleDetail): number {
  // The queue row carries decision_count; the detail route carries the
  // latest decision only, so fall back to 1 when one exists.
  const item = state.queue?.items.find((i) => i.article.id === detail.article.id);
  if (item !== undefined) return item.decision_count;
  return detail.decision === null ? 0 : 1;
}

async function refresh(): Promise<void> {
  try {
    const [queue, stats] = await Promise.all([
      client.getQueue(state.page.filters),
      client.getStats(),
    ]);
    state.queue = queue;
    state.stats = stats;
    state.error = null;
    state.selected = Math.min(state.selected, Math.max(0, queue.items.length - 1));
    if (state.page.article !== undefined) {
      state.detail = await client.getArticle(state.page.article);
    } else {
      state.detail = null;
    }
  } catch (err) {
    state.error = errorText(err);
    state.queue = null;
    state.stats = null;
    state.detail = null;
  }
  render();
}

function setFilter(name: string, value: string): void {
  const filters = { ...state.page.filters, page: 1 };
  if (name === "status") filters.status = (value || undefined) as typeof filters.status;
  if (name === "label") filters.label = (value || undefined) as typeof filters.label;
  if (name === "rule") filters.rule = (value || undefined) as typeof filters.rule;
  state.page = { ...state.page, filters };
  state.selected = 0;
  pushUrl();
  void refresh();
}

function turnPage(delta: number): void {
  const page = Math.max(1, state.page.filters.page + delta);
  if (page === state.page.filters.page) return;
  state.page = { ...state.page, filters: { ...state.page.filters, page } };
  state.selected = 0;
  pushUrl();
  void refresh();
}

function openArticle(articleId: string): void {
  state.page = { ...state.page, article: articleId };
  pushUrl();
  void refresh();
}

function closeArticle(): void {
  if (state.page.article === undefined) return;
  state.page = { ...state.page, article: undefined };
  pushUrl();
  void refresh();
}

function moveSelection(delta: number): void {
  if (state.queue === null || state.queue.items.length === 0) return;
  if (state.page.article !== undefined) {
    // With an article open, j/k walk the queue directly.
    const ids = state.queue.items.map((i) => i.article.id);
    const at = ids.indexOf(state.page.article);
    const next = Math.min(ids.length - 1, Math.max(0, at + delta));
    if (next !== at) openArticle(ids[next]);
    return;
  }
  state.selected = Math.min(
    state.queue.items.length - 1,
    Math.max(0, state.selected + delta),
  );
  render();
}

async function decide(decision: Decision): Promise<void> {
  const articleId = state.page.article;
  if (articleId === undefined) return;
  const reviewerInput = document.querySelector<HTMLInputElement>("[data-field=reviewer]");
  const noteInput = document.querySelector<HTMLInputElement>("[data-field=note]");
  const reviewer = reviewerInput?.value.trim() || reviewerName();
  window.localStorage.setItem("reviewer", reviewer);
  try {
    await outbox.send(articleId, { decision, reviewer, note: noteInput?.value.trim() });
    state.notice = `Recorded ${decision} for ${articleId}.`;
  } catch (err) {
    state.notice = `Decision for ${articleId} not delivered: ${errorText(err)}`;
  }
  await refresh();
}

async function flushOutbox(): Promise<void> {
  const result = await outbox.flush();
  state.notice =
    result.remaining.length === 0
      ? `Delivered ${result.delivered.length} pending decision(s).`
      : `${result.remaining.length} decision(s) still undelivered.`;
  await refresh();
}

function onKeydown(event: KeyboardEvent): void {
  const target = event.target as HTMLElement;
  if (target.tagName === "INPUT" || target.tagName === "TEXTAREA" || target.tagName === "SELECT") {
    return;
  }
  switch (event.key) {
    case "j":
      moveSelection(1);
      break;
    case "k":
      moveSelection(-1);
      break;
    case "Enter":
    case "o": {
      const item = state.queue?.items[state.selected];
      if (item !== undefined && state.page.article === undefined) {
        openArticle(item.article.id);
      }
      break;
    }
    case "Escape":
      closeArticle();
      break;
    case "r":
      void decide("relevant");
      break;
    case "n":
      void decide("not_relevant");
      break;
    case "[":
      turnPage(-1);
      break;
    case "]":
      turnPage(1);
      break;
    default:
      break;
  }
}

function onClick(event: MouseEvent): void {
  const target = event.target as HTMLElement;
  const row = target.closest<HTMLElement>("[data-article-id]");
  const nav = target.closest<HTMLElement>("[data-nav]");
  const action = target.closest<HTMLElement>("[data-action]");
  const decisionBtn = target.closest<HTMLElement>("[data-decision]");
  if (decisionBtn !== null) {
    void decide(decisionBtn.dataset.decision as Decision);
  } else if (action?.dataset.action === "close") {
    closeArticle();
  } else if (action?.dataset.action === "retry") {
    void refresh();
  } else if (action?.dataset.action === "flush-outbox") {
    void flushOutbox();
  } else if (nav !== null) {
    turnPage(nav.dataset.nav === "next" ? 1 : -1);
  } else if (row !== null && row.classList.contains("queue-row")) {
    openArticle(row.dataset.articleId ?? "");
  }
}

function onChange(event: Event): void {
  const target = event.target as HTMLElement;
  if (target instanceof HTMLSelectElement && target.dataset.filter !== undefined) {
    setFilter(target.dataset.filter, target.value);
  }
}

window.addEventListener("popstate", () => {
  state.page = parsePageState(window.location.search);
  void refresh();
});
document.addEventListener("keydown", onKeydown);
document.addEventListener("click", onClick);
document.addEventListener("change", onChange);

void refresh();

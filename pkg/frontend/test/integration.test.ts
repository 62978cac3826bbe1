/** End-to-end checks against a live seeded service (see seed-service.ts).
 *
 * The corpus is synthesized with a fixed seed and the bundle calibrated the
 * same way every run, so the queue composition asserted here is exact, not
 * approximate. Tests run in file order: the read-only checks come first, the
 * decision flow afterwards mutates the queue on purpose.
 */

import { readFileSync } from "node:fs";
import { beforeAll, describe, expect, inject, it } from "vitest";
import { ApiError, createClient, type TriageClient } from "../src/api.js";
import {
  buildArticleHighlights,
  mentionSurfaces,
  reassemble,
  topAttributions,
} from "../src/highlight.js";
import {
  renderArticlePanel,
  renderQueueTable,
  renderStatsBanner,
  renderTrace,
} from "../src/render.js";
import type { ArticleDetail, ArticleRecord, BatchAck, QueueStats } from "../src/types.js";
import { defaultFilters, type QueueFilters } from "../src/urlstate.js";
import { ABSTRACT_REGION, TITLE_REGION, marksIn, regionText, statValues } from "./util.js";

const R4_ID = "SYN-000001";
const R3_ID = "SYN-000003";

function filters(overrides: Partial<QueueFilters> = {}): QueueFilters {
  return { ...defaultFilters(), ...overrides };
}

function viewFor(detail: ArticleDetail, decisionCount = 0) {
  const built = buildArticleHighlights(detail);
  return {
    detail,
    titleSegments: built.title,
    abstractSegments: built.abstract,
    decisionCount,
    reviewer: "it-screener",
  };
}

describe("against a seeded service", () => {
  let client: TriageClient;
  let seeded: ArticleRecord[];
  let ack: BatchAck;

  beforeAll(async () => {
    client = createClient(inject("baseUrl"));
    const lines = readFileSync(inject("corpusPath"), "utf-8").trimEnd().split("\n");
    seeded = lines.slice(0, 60).map((line) => {
      const rec = JSON.parse(line) as ArticleRecord;
      return { id: rec.id, title: rec.title, abstract: rec.abstract };
    });
    const handcrafted: ArticleRecord = {
      id: "fr-ui-1",
      title: "Hépatite aiguë après la prise d'un antalgique courant",
      abstract:
        "Nous décrivons une hépatite aiguë survenue chez une patiente après la " +
        "prise d'un antalgique courant. L'évolution a été favorable après " +
        "l'arrêt du traitement.",
    };
    ack = await client.enqueueBatch([...seeded, handcrafted]);
  });

  it("screens the whole batch on ingest", () => {
    expect(ack.batch_id).toBe(1);
    expect(ack.summary.size).toBe(61);
    expect(ack.summary.labels).toEqual({ suspect_adverse: 20, not_suspect: 41 });
    expect(ack.summary.rules).toEqual({
      R1_envelope: 1,
      R2_scorer_a: 0,
      R3_scorer_b_highconf: 18,
      R4_identifiable_patient: 1,
      R5_default: 41,
    });
  });

  it("filters the queue down to pending suspects", async () => {
    const page = await client.getQueue(
      filters({ status: "pending", label: "suspect_adverse", pageSize: 50 }),
    );
    expect(page.total).toBe(20);
    expect(page.items).toHaveLength(20);
    for (const item of page.items) {
      expect(item.status).toBe("pending");
      expect(item.prediction.label).toBe("suspect_adverse");
    }
    const ids = page.items.map((item) => item.article.id);
    expect(ids).toContain(R4_ID);
    expect(ids).toContain("fr-ui-1");

    const html = renderQueueTable(page);
    for (const id of ids) expect(html).toContain(`data-article-id="${id}"`);
  });

  it("shows the empty state when a filter matches nothing", async () => {
    // Runs before any decision is recorded, so nothing is reviewed yet.
    const page = await client.getQueue(filters({ status: "reviewed" }));
    expect(page.total).toBe(0);
    const html = renderQueueTable(page);
    expect(html).toContain('class="empty-state"');
    expect(html).toContain("No items match the current filters.");
  });

  it("isolates the identifiable-patient rule and shows it fired", async () => {
    const page = await client.getQueue(filters({ rule: "R4_identifiable_patient" }));
    expect(page.total).toBe(1);
    expect(page.items[0].article.id).toBe(R4_ID);
    for (const item of page.items) {
      const r4 = item.prediction.trace.find((t) => t.rule_id === "R4_identifiable_patient");
      expect(r4?.fired).toBe(true);
      const html = renderTrace(item.prediction.trace);
      expect(html).toMatch(/data-rule="R4_identifiable_patient"[\s\S]*?data-trace-state="fired"/);
    }
  });

  it("reassembles highlighted spans to the exact article text", async () => {
    for (const id of [R4_ID, R3_ID]) {
      const detail = await client.getArticle(id);
      expect(detail.explanation, id).not.toBeNull();
      expect(detail.explanation!.mode).toBe("sampled_lime");

      const text = `${detail.article.title}\n${detail.article.abstract}`;
      const view = buildArticleHighlights(detail);
      expect(reassemble(view.title), id).toBe(detail.article.title);
      expect(reassemble(view.abstract), id).toBe(detail.article.abstract);

      // The server's spans tile the document: title first, then abstract
      // sentences with one separator character between consecutive spans.
      const spans = [...detail.explanation!.attributions].sort((a, b) => a.start - b.start);
      expect(spans[0].start).toBe(0);
      expect(spans[0].end).toBe(detail.article.title.length);
      for (let i = 1; i < spans.length; i += 1) {
        expect(spans[i].start, id).toBe(spans[i - 1].end + 1);
      }
      expect(spans[spans.length - 1].end).toBe(text.length);

      // Influence ordering is the server's: strongest first.
      const influences = detail.explanation!.attributions.map((a) => Math.abs(a.influence));
      for (let i = 1; i < influences.length; i += 1) {
        expect(influences[i - 1] + 1e-12).toBeGreaterThanOrEqual(influences[i]);
      }

      // Rendered marks carry exactly the characters of their spans.
      const html = renderArticlePanel(viewFor(detail));
      expect(regionText(html, ABSTRACT_REGION), id).toBe(detail.article.abstract);
      expect(regionText(html, TITLE_REGION), id).toBe(detail.article.title);
      for (const mark of marksIn(html)) {
        expect(mark.text, id).toBe(text.slice(mark.start, mark.end));
      }

      // Each top-k sentence span is tiled exactly by segments that carry the
      // sentence kind. No attribution span contains the title separator, so
      // the title/abstract split never punches a hole in the coverage.
      const segments = [...view.title, ...view.abstract];
      for (const attribution of topAttributions(detail.explanation)) {
        const inside = segments.filter(
          (s) => s.start >= attribution.start && s.end <= attribution.end,
        );
        const covered = inside.map((s) => s.text).join("");
        expect(covered, id).toBe(text.slice(attribution.start, attribution.end));
        for (const segment of inside) {
          expect(segment.kinds, id).toContain("sentence");
        }
      }
    }
  });

  it("locates every reported patient mention in the text", async () => {
    const detail = await client.getArticle(R4_ID);
    const surfaces = mentionSurfaces(detail.trace);
    expect(surfaces.length).toBeGreaterThan(0);
    const text = `${detail.article.title}\n${detail.article.abstract}`;
    for (const surface of surfaces) {
      expect(text).toContain(surface);
    }
    const html = renderArticlePanel(viewFor(detail));
    const mentionMarks = marksIn(html).filter((m) => m.classes.includes("hl-mention"));
    expect(mentionMarks.length).toBeGreaterThan(0);
  });

  it("renders the stats banner from the service numbers", async () => {
    const stats = await client.getStats();
    const values = statValues(renderStatsBanner(stats));
    expect(values["items.total"]).toBe(String(stats.items.total));
    expect(values["items.pending"]).toBe(String(stats.items.pending));
    expect(values["items.reviewed"]).toBe(String(stats.items.reviewed));
    expect(values["labels.suspect_adverse"]).toBe(String(stats.labels.suspect_adverse));
    expect(values["labels.not_suspect"]).toBe(String(stats.labels.not_suspect));
    expect(values["decisions_recorded"]).toBe(String(stats.decisions_recorded));
    expect(stats.items.total).toBe(61);
    expect(stats.thresholds).toEqual({ theta_a: 1.0, theta_b: 0.97 });
    expect(stats.bundle_digest).not.toBeNull();
  });

  describe("decision flow", () => {
    let before: QueueStats;

    beforeAll(async () => {
      before = await client.getStats();
    });

    it("moves a decided item out of the pending queue and into the stats", async () => {
      const ackDecision = await client.submitDecision(R4_ID, {
        decision: "relevant",
        reviewer: "it-screener",
        note: "confirmed case report",
      });
      expect(ackDecision).toEqual({ article_id: R4_ID, status: "reviewed", decision_count: 1 });

      const pending = await client.getQueue(
        filters({ status: "pending", label: "suspect_adverse", pageSize: 50 }),
      );
      expect(pending.total).toBe(19);
      expect(pending.items.map((item) => item.article.id)).not.toContain(R4_ID);

      const reviewed = await client.getQueue(filters({ status: "reviewed" }));
      expect(reviewed.total).toBe(1);
      expect(reviewed.items[0].article.id).toBe(R4_ID);
      expect(reviewed.items[0].decision?.decision).toBe("relevant");

      const stats = await client.getStats();
      expect(stats.items.pending).toBe(before.items.pending - 1);
      expect(stats.items.reviewed).toBe(before.items.reviewed + 1);
      expect(stats.decisions_recorded).toBe(before.decisions_recorded + 1);
      expect(stats.confusion.tp).toBe(before.confusion.tp + 1);
      expect(stats.confusion.fp).toBe(before.confusion.fp);

      const detail = await client.getArticle(R4_ID);
      expect(detail.status).toBe("reviewed");
      expect(detail.decision?.decision).toBe("relevant");
      expect(detail.decision?.reviewer).toBe("it-screener");
      expect(detail.decision?.note).toBe("confirmed case report");
    });

    it("accepts a second decision and keeps the full history visible", async () => {
      const ackDecision = await client.submitDecision(R4_ID, {
        decision: "not_relevant",
        reviewer: "it-screener",
      });
      expect(ackDecision.decision_count).toBe(2);
      expect(ackDecision.status).toBe("reviewed");

      const stats = await client.getStats();
      expect(stats.decisions_recorded).toBe(before.decisions_recorded + 2);
      // The latest decision wins: the true positive became a false positive.
      expect(stats.confusion.tp).toBe(before.confusion.tp);
      expect(stats.confusion.fp).toBe(before.confusion.fp + 1);

      const detail = await client.getArticle(R4_ID);
      expect(detail.decision?.decision).toBe("not_relevant");
      const html = renderArticlePanel(viewFor(detail, ackDecision.decision_count));
      expect(html).toContain('data-decision-count="2"');
      expect(html).toContain("not_relevant");
    });
  });

  it("flags the handcrafted report as out of envelope, without highlights", async () => {
    const detail = await client.getArticle("fr-ui-1");
    expect(detail.prediction.fired_rule).toBe("R1_envelope");
    expect(detail.prediction.label).toBe("suspect_adverse");
    expect(detail.prediction.envelope.in_envelope).toBe(false);
    expect(detail.prediction.envelope.reasons.length).toBeGreaterThan(0);
    expect(detail.explanation).toBeNull();

    const view = buildArticleHighlights(detail);
    expect(view.highlights).toEqual([]);
    expect(reassemble(view.abstract)).toBe(detail.article.abstract);

    const html = renderArticlePanel(viewFor(detail));
    expect(html).toContain('class="no-explanation"');
    expect(html).toMatch(/data-rule="R1_envelope"[\s\S]*?data-trace-state="fired"/);
    expect(regionText(html, ABSTRACT_REGION)).toBe(detail.article.abstract);
    expect(marksIn(html)).toEqual([]);
  });

  it("surfaces service errors verbatim", async () => {
    const missing = await client.getArticle("nope").catch((err: unknown) => err);
    expect(missing).toBeInstanceOf(ApiError);
    expect((missing as ApiError).status).toBe(404);
    expect((missing as ApiError).code).toBe("not_found");
    expect((missing as ApiError).detail).toContain("nope");

    const decideMissing = await client
      .submitDecision("nope", { decision: "relevant", reviewer: "it-screener" })
      .catch((err: unknown) => err);
    expect(decideMissing).toBeInstanceOf(ApiError);
    expect((decideMissing as ApiError).status).toBe(404);

    const blankReviewer = await client
      .submitDecision(R3_ID, { decision: "relevant", reviewer: "" })
      .catch((err: unknown) => err);
    expect(blankReviewer).toBeInstanceOf(ApiError);
    expect((blankReviewer as ApiError).status).toBe(400);
  });
});

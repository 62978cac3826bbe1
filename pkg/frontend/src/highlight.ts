/** Span bookkeeping for the article view.
 *
 * The server explains a prediction as character spans into the document text,
 * title + "\n" + abstract, one span per sentence with single-character gaps
 * between them. Rendering must reproduce that text exactly, highlighted or
 * not, so the view is built from a segmentation that covers every character:
 * concatenating the segments in order gives back the input byte for byte.
 */

import type { ArticleDetail, Attribution, Explanation, TraceEntry } from "./types.js";

export type HighlightKind = "sentence" | "mention";

export interface Span {
  start: number;
  end: number;
}

export interface Highlight extends Span {
  kind: HighlightKind;
}

/** A run of text with the highlight kinds active over it. Empty kinds = plain. */
export interface Segment {
  start: number;
  end: number;
  text: string;
  kinds: HighlightKind[];
}

export const TOP_K_DEFAULT = 3;

const KIND_ORDER: readonly HighlightKind[] = ["sentence", "mention"];

/** First k attributions with nonzero influence, in the server's order
 * (descending |influence|, index as the tiebreak). */
export function topAttributions(
  explanation: Explanation | null,
  k: number = TOP_K_DEFAULT,
): Attribution[] {
  if (explanation === null || k <= 0) return [];
  return explanation.attributions.filter((a) => a.influence !== 0).slice(0, k);
}

/** Patient-mention surfaces from the rule trace. The cascade reports them as
 * a "mentions: a; b" detail on the patient rule when it fired. */
export function mentionSurfaces(trace: TraceEntry[]): string[] {
  const entry = trace.find((t) => t.rule_id === "R4_identifiable_patient");
  if (!entry || !entry.fired) return [];
  const prefix = "mentions: ";
  if (!entry.detail.startsWith(prefix)) return [];
  return entry.detail
    .slice(prefix.length)
    .split("; ")
    .filter((surface) => surface.length > 0);
}

/** Every non-overlapping occurrence of a surface string, leftmost first. */
export function findOccurrences(text: string, surface: string): Span[] {
  if (surface.length === 0) return [];
  const spans: Span[] = [];
  let from = 0;
  for (;;) {
    const at = text.indexOf(surface, from);
    if (at === -1) break;
    spans.push({ start: at, end: at + surface.length });
    from = at + surface.length;
  }
  return spans;
}

/** Cover [0, text.length) with contiguous segments, splitting at every
 * highlight edge and every extra cut point. Overlapping highlights stack:
 * a segment under both a sentence and a mention carries both kinds.
 *
 * Spans outside the text are a caller bug (the server's spans are exact),
 * so they throw rather than getting clamped into something misleading.
 */
export function segmentText(
  text: string,
  highlights: Highlight[],
  cuts: number[] = [],
): Segment[] {
  for (const h of highlights) {
    if (h.start < 0 || h.end > text.length || h.start >= h.end) {
      throw new RangeError(
        `highlight [${h.start}, ${h.end}) outside text of length ${text.length}`,
      );
    }
  }
  for (const cut of cuts) {
    if (cut < 0 || cut > text.length) {
      throw new RangeError(`cut ${cut} outside text of length ${text.length}`);
    }
  }

  const edges = new Set<number>([0, text.length]);
  for (const h of highlights) {
    edges.add(h.start);
    edges.add(h.end);
  }
  for (const cut of cuts) edges.add(cut);
  const sorted = Array.from(edges).sort((a, b) => a - b);

  const segments: Segment[] = [];
  for (let i = 0; i + 1 < sorted.length; i += 1) {
    const start = sorted[i];
    const end = sorted[i + 1];
    const active = new Set<HighlightKind>();
    for (const h of highlights) {
      if (h.start <= start && end <= h.end) active.add(h.kind);
    }
    segments.push({
      start,
      end,
      text: text.slice(start, end),
      kinds: KIND_ORDER.filter((kind) => active.has(kind)),
    });
  }
  return segments;
}

export interface ArticleHighlights {
  /** Segments covering exactly the title. */
  title: Segment[];
  /** Segments covering exactly the abstract. */
  abstract: Segment[];
  /** The highlights that were applied, in no particular order. */
  highlights: Highlight[];
}

/** Build the highlighted view of one article: top-k explanation sentences
 * plus patient-mention surfaces located in the text. The title/abstract
 * boundary is a forced cut, so no segment straddles the separator and each
 * region reassembles to its original text exactly.
 */
export function buildArticleHighlights(
  detail: ArticleDetail,
  topK: number = TOP_K_DEFAULT,
): ArticleHighlights {
  const { title, abstract } = detail.article;
  const text = `${title}\n${abstract}`;

  const highlights: Highlight[] = [];
  for (const attribution of topAttributions(detail.explanation, topK)) {
    highlights.push({ start: attribution.start, end: attribution.end, kind: "sentence" });
  }
  for (const surface of mentionSurfaces(detail.trace)) {
    for (const span of findOccurrences(text, surface)) {
      highlights.push({ ...span, kind: "mention" });
    }
  }

  const abstractStart = title.length + 1;
  const cuts = [title.length, Math.min(abstractStart, text.length)];
  const segments = segmentText(text, highlights, cuts);
  return {
    title: segments.filter((s) => s.end <= title.length),
    abstract: segments.filter((s) => s.start >= abstractStart),
    highlights,
  };
}

/** Reassembly check used by callers that want the invariant asserted at the
 * point of use: the segments must concatenate back to the expected text. */
export function reassemble(segments: Segment[]): string {
  return segments.map((s) => s.text).join("");
}

/** HTML inspection helpers for the renderer tests: the views are plain
 * strings, so assertions work on tag-stripped text and data attributes. */

export function stripTags(html: string): string {
  return html.replace(/<[^>]+>/g, "");
}

// Exact inverse of escapeHtml: undo the entities in reverse order so a
// literal "&amp;" in the source text survives the round trip.
export function unescapeEntities(text: string): string {
  return text
    .replace(/&#39;/g, "'")
    .replace(/&quot;/g, '"')
    .replace(/&gt;/g, ">")
    .replace(/&lt;/g, "<")
    .replace(/&amp;/g, "&");
}

/** data-stat attribute -> rendered value, for checking the banner numbers. */
export function statValues(html: string): Record<string, string> {
  const values: Record<string, string> = {};
  for (const match of html.matchAll(/data-stat="([^"]+)">([^<]*)</g)) {
    values[match[1]] = match[2];
  }
  return values;
}

export interface Mark {
  classes: string;
  start: number;
  end: number;
  text: string;
}

/** Every <mark> with its highlight classes, span offsets, and source text. */
export function marksIn(html: string): Mark[] {
  return Array.from(
    html.matchAll(/<mark class="([^"]+)" data-start="(\d+)" data-end="(\d+)">([\s\S]*?)<\/mark>/g),
    (m) => ({
      classes: m[1],
      start: Number(m[2]),
      end: Number(m[3]),
      text: unescapeEntities(m[4]),
    }),
  );
}

/** Inner HTML of the first match, tag-stripped and unescaped back to text. */
export function regionText(html: string, pattern: RegExp): string {
  const match = html.match(pattern);
  if (match === null) throw new Error(`no region matching ${pattern}`);
  return unescapeEntities(stripTags(match[1]));
}

export const ABSTRACT_REGION = /<p class="article-abstract" data-region="abstract">([\s\S]*?)<\/p>/;

export const TITLE_REGION = /<h2 class="article-title">([\s\S]*?)<\/h2>/;

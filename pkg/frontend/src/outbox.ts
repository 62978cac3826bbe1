/** Client-side holding pen for decisions the server has not acknowledged.
 *
 * A decision leaves the outbox only on a server ack, so a network drop or an
 * error response never silently loses a reviewer's work. Failed entries stay
 * listed with the last error and can be retried in submission order.
 */

import type { DecisionAck, DecisionBody } from "./types.js";

export interface OutboxEntry {
  articleId: string;
  body: DecisionBody;
  error: string;
  attempts: number;
}

export interface FlushResult {
  delivered: DecisionAck[];
  remaining: OutboxEntry[];
}

export type SubmitFn = (articleId: string, body: DecisionBody) => Promise<DecisionAck>;

export interface DecisionOutbox {
  /** Submit now; on any failure the decision is kept for retry and the
   * error is rethrown so the caller can surface it. */
  send(articleId: string, body: DecisionBody): Promise<DecisionAck>;
  /** Retry everything pending, oldest first. Entries that fail again stay. */
  flush(): Promise<FlushResult>;
  list(): readonly OutboxEntry[];
  size(): number;
}

export function createOutbox(submit: SubmitFn): DecisionOutbox {
  const entries: OutboxEntry[] = [];

  function message(err: unknown): string {
    return err instanceof Error ? err.message : String(err);
  }

  return {
    async send(articleId: string, body: DecisionBody): Promise<DecisionAck> {
      try {
        return await submit(articleId, body);
      } catch (err) {
        entries.push({ articleId, body, error: message(err), attempts: 1 });
        throw err;
      }
    },

    async flush(): Promise<FlushResult> {
      const delivered: DecisionAck[] = [];
      const snapshot = entries.splice(0, entries.length);
      for (const entry of snapshot) {
        try {
          delivered.push(await submit(entry.articleId, entry.body));
        } catch (err) {
          entries.push({
            ...entry,
            error: message(err),
            attempts: entry.attempts + 1,
          });
        }
      }
      return { delivered, remaining: [...entries] };
    },

    list(): readonly OutboxEntry[] {
      return [...entries];
    },

    size(): number {
      return entries.length;
    },
  };
}

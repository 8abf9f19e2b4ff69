/**
 * Cursor-based warning feed.
 *
 * The server hands out warnings strictly after a cursor plus the new head
 * position. Persisting the cursor (localStorage in the browser) means a
 * page reload resumes where the last poll stopped instead of re-showing
 * rows the operator already saw.
 */

import type { ApiClient, WarningRow } from "./api.js";

/** The subset of Storage the feed needs; tests pass a Map-backed fake. */
export interface KeyValueStore {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
}

const CURSOR_KEY = "trapsight.warnings.cursor";

export function loadCursor(storage: KeyValueStore): number {
  const raw = storage.getItem(CURSOR_KEY);
  const parsed = raw === null ? NaN : Number(raw);
  return Number.isInteger(parsed) && parsed >= 0 ? parsed : 0;
}

export class WarningFeed {
  private readonly api: ApiClient;
  private readonly storage: KeyValueStore;
  private cursor: number;
  private readonly seen = new Set<number>();
  readonly rows: WarningRow[] = [];

  constructor(api: ApiClient, storage: KeyValueStore) {
    this.api = api;
    this.storage = storage;
    this.cursor = loadCursor(storage);
  }

  get position(): number {
    return this.cursor;
  }

  /** Fetch anything new; returns only the rows added by this poll. */
  async poll(): Promise<WarningRow[]> {
    const batch = await this.api.getWarnings(this.cursor);
    const fresh: WarningRow[] = [];
    for (const row of batch.warnings) {
      if (this.seen.has(row.seq)) continue; // server resent; drop it
      this.seen.add(row.seq);
      this.rows.push(row);
      fresh.push(row);
    }
    this.cursor = batch.cursor;
    this.storage.setItem(CURSOR_KEY, String(this.cursor));
    return fresh;
  }
}

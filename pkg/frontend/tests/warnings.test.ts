import { describe, expect, it } from "vitest";

import type { ApiClient, WarningBatch, WarningRow } from "../src/api.js";
import { loadCursor, WarningFeed, type KeyValueStore } from "../src/warnings.js";

function fakeStorage(): KeyValueStore & { data: Map<string, string> } {
  const data = new Map<string, string>();
  return {
    data,
    getItem: (k) => data.get(k) ?? null,
    setItem: (k, v) => void data.set(k, v),
  };
}

function row(seq: number): WarningRow {
  return {
    seq,
    event_seq: seq * 2,
    ts: `2024-06-01T00:00:0${seq}+00:00`,
    count: 1,
    message: `1 weevil(s) detected in frame ${seq * 2}`,
  };
}

/** Server double that answers cursor queries the way the real feed does. */
function fakeApi(all: WarningRow[]): ApiClient {
  const getWarnings = async (cursor: number): Promise<WarningBatch> => ({
    warnings: all.filter((w) => w.seq > cursor),
    cursor: all.length ? Math.max(...all.map((w) => w.seq)) : cursor,
  });
  return { getWarnings } as unknown as ApiClient;
}

describe("loadCursor", () => {
  it("defaults to 0 for missing or garbage values", () => {
    const storage = fakeStorage();
    expect(loadCursor(storage)).toBe(0);
    storage.setItem("trapsight.warnings.cursor", "banana");
    expect(loadCursor(storage)).toBe(0);
    storage.setItem("trapsight.warnings.cursor", "-3");
    expect(loadCursor(storage)).toBe(0);
    storage.setItem("trapsight.warnings.cursor", "12");
    expect(loadCursor(storage)).toBe(12);
  });
});

describe("WarningFeed", () => {
  it("collects rows and advances the persisted cursor", async () => {
    const all = [row(1), row(2)];
    const storage = fakeStorage();
    const feed = new WarningFeed(fakeApi(all), storage);
    const fresh = await feed.poll();
    expect(fresh.map((w) => w.seq)).toEqual([1, 2]);
    expect(feed.position).toBe(2);
    expect(storage.getItem("trapsight.warnings.cursor")).toBe("2");
  });

  it("polling again adds nothing until the server has more", async () => {
    const all = [row(1)];
    const feed = new WarningFeed(fakeApi(all), fakeStorage());
    await feed.poll();
    expect(await feed.poll()).toEqual([]);
    all.push(row(2));
    expect((await feed.poll()).map((w) => w.seq)).toEqual([2]);
    expect(feed.rows.map((w) => w.seq)).toEqual([1, 2]);
  });

  it("drops rows the server re-sends", async () => {
    const storage = fakeStorage();
    // a server that ignores the cursor and always returns everything
    const sloppy = {
      getWarnings: async (): Promise<WarningBatch> => ({
        warnings: [row(1), row(2)],
        cursor: 2,
      }),
    } as unknown as ApiClient;
    const feed = new WarningFeed(sloppy, storage);
    await feed.poll();
    await feed.poll();
    expect(feed.rows.map((w) => w.seq)).toEqual([1, 2]); // still just once
  });

  it("a reload resumes from the stored cursor with no duplicates", async () => {
    const all = [row(1), row(2)];
    const storage = fakeStorage();
    const before = new WarningFeed(fakeApi(all), storage);
    await before.poll();

    // page reload: a new feed over the same storage
    const after = new WarningFeed(fakeApi(all), storage);
    expect(after.position).toBe(2);
    expect(await after.poll()).toEqual([]); // rows 1-2 are not re-shown

    all.push(row(3));
    expect((await after.poll()).map((w) => w.seq)).toEqual([3]);
  });
});

/**
 * The dashboard rule under test here: every number shown is lifted from
 * an API payload, never computed client-side. The fixtures use odd,
 * "wrong-looking" values on purpose — if a renderer recalculated
 * anything, the assertions on those exact values would fail.
 */

import { describe, expect, it } from "vitest";

import type { ConfigEnvelope, EventRecord, StatusInfo } from "../src/api.js";
import { buildMonthGrid } from "../src/calendar.js";
import {
  escapeHtml,
  renderCalendar,
  renderEvents,
  renderSettingsForm,
  renderStatus,
  renderWarnings,
} from "../src/views.js";

const STATUS: StatusInfo = {
  uptime_s: 125,
  frames_processed: 41,
  config_version: 9,
  event_count: 37, // deliberately != frames_processed: rejects are not events
  image_count: 36,
  kernel_backend: "compiled",
  last_event: {
    storage_seq: 37,
    seq: 37,
    ts: "2024-06-01T00:41:00+00:00",
    count: 5,
    algorithm: "B",
    similarity: 99.1,
    image_ref: "deadbeef",
    config: { t: 60, s: 97.0, lower: 27785, upper: 266000 },
  },
};

const ENVELOPE: ConfigEnvelope = {
  config: { t: 60, s: 97.0, lower: 27785, upper: 266000, alert_threshold: 1 },
  version: 4,
  applied_at: "2024-06-01T00:00:00+00:00",
};

describe("renderStatus", () => {
  it("shows the server's counters verbatim", () => {
    const html = renderStatus(STATUS);
    expect(html).toContain(">41<");
    expect(html).toContain(">37<");
    expect(html).toContain(">36<");
    expect(html).toContain(">9<");
    expect(html).toContain(">compiled<");
    expect(html).toContain("2m 5s");
  });

  it("summarizes the last event from the payload", () => {
    const html = renderStatus(STATUS);
    expect(html).toContain("event #37");
    expect(html).toContain("count 5 (B)");
  });

  it("handles a trap with no detections yet", () => {
    expect(renderStatus({ ...STATUS, last_event: null })).toContain(
      "no detections yet",
    );
  });
});

describe("renderSettingsForm", () => {
  it("fills inputs from the server echo", () => {
    const html = renderSettingsForm(ENVELOPE);
    expect(html).toContain('name="t" value="60"');
    expect(html).toContain('name="s" value="97"');
    expect(html).toContain('name="lower" value="27785"');
    expect(html).toContain("server version 4");
  });

  it("keeps the operator's rejected values in the inputs", () => {
    const html = renderSettingsForm(
      ENVELOPE,
      { t: "must be an integer in [0, 255]" },
      { t: "999" },
    );
    expect(html).toContain('name="t" value="999"'); // not reset to 60
    expect(html).toContain("must be an integer");
    // untouched fields still show server values
    expect(html).toContain('name="upper" value="266000"');
  });

  it("renders errors for fields outside the form", () => {
    const html = renderSettingsForm(ENVELOPE, { bogus: "unknown field" });
    expect(html).toContain("bogus: unknown field");
  });
});

describe("renderWarnings", () => {
  it("shows an empty state, not an empty list", () => {
    expect(renderWarnings([])).toContain("No warnings.");
  });

  it("renders one row per warning with server text", () => {
    const html = renderWarnings([
      {
        seq: 1,
        event_seq: 3,
        ts: "2024-06-01T00:00:02+00:00",
        count: 1,
        message: "1 weevil(s) detected in frame 3",
      },
      {
        seq: 2,
        event_seq: 5,
        ts: "2024-06-01T00:00:04+00:00",
        count: 2,
        message: "2 weevil(s) detected in frame 5",
      },
    ]);
    expect(html.match(/<li/g)).toHaveLength(2);
    expect(html).toContain('data-seq="1"');
    expect(html).toContain("2 weevil(s) detected in frame 5");
  });
});

describe("renderCalendar", () => {
  it("shows totals only on days the server reported", () => {
    const weeks = buildMonthGrid("2024-06", { "1": 4, "15": 2 });
    const html = renderCalendar("June 2024", weeks);
    expect(html.match(/day-count/g)).toHaveLength(2);
    expect(html).toContain('<span class="day-count">4</span>');
    expect(html).toContain('<span class="day-count">2</span>');
    // day 2 exists but stays blank — no zero is invented
    expect(html).toContain('<span class="day-num">2</span></td>');
  });
});

describe("renderEvents", () => {
  const EVENTS: EventRecord[] = [
    {
      storage_seq: 1,
      seq: 1,
      ts: "2024-06-01T00:00:00+00:00",
      count: 0,
      algorithm: "A-first-frame",
      similarity: null,
      image_ref: "cafe01",
      config: { t: 60, s: 97.0, lower: 27785, upper: 266000 },
    },
    {
      storage_seq: 2,
      seq: 2,
      ts: "2024-06-01T00:00:01+00:00",
      count: 3,
      algorithm: "B",
      similarity: 99.342,
      image_ref: "cafe02",
      config: { t: 60, s: 97.0, lower: 27785, upper: 266000 },
    },
  ];

  it("renders counts and similarity from the payload", () => {
    const html = renderEvents(EVENTS, (id, fmt) => `/api/images/${id}?format=${fmt}`);
    expect(html).toContain('<td class="num">0</td>');
    expect(html).toContain('<td class="num">3</td>');
    expect(html).toContain("99.34"); // formatted, not recomputed
    expect(html).toContain("—"); // null similarity on the first frame
  });

  it("sources thumbnails through the image url helper", () => {
    const html = renderEvents(EVENTS, (id, fmt) => `/api/images/${id}?format=${fmt}`);
    expect(html).toContain('src="/api/images/cafe01?format=png"');
    expect(html).toContain('src="/api/images/cafe02?format=png"');
  });

  it("shows an empty state for an empty range", () => {
    expect(renderEvents([], () => "")).toContain("No events in range.");
  });
});

describe("escapeHtml", () => {
  it("neutralizes markup in server strings", () => {
    expect(escapeHtml(`<img src=x onerror="pwn()">`)).toBe(
      "&lt;img src=x onerror=&quot;pwn()&quot;&gt;",
    );
  });
});

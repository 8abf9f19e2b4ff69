/**
 * Typed client for the trapsight HTTP API.
 *
 * Every view in the dashboard goes through this module; nothing else in
 * the frontend talks to the network. The client does no interpretation
 * of its own — payloads are passed through as the server shaped them, so
 * every number on screen is traceable to a response body.
 */

export interface DetectionConfig {
  t: number;
  s: number;
  lower: number;
  upper: number;
  alert_threshold: number;
}

export interface ConfigEnvelope {
  config: DetectionConfig;
  version: number;
  applied_at: string;
}

export interface EventRecord {
  storage_seq: number;
  seq: number;
  ts: string;
  count: number;
  algorithm: string;
  similarity: number | null;
  image_ref: string;
  config: Omit<DetectionConfig, "alert_threshold">;
}

export interface WarningRow {
  seq: number;
  event_seq: number;
  ts: string;
  count: number;
  message: string;
}

export interface WarningBatch {
  warnings: WarningRow[];
  cursor: number;
}

export interface StatusInfo {
  uptime_s: number;
  frames_processed: number;
  config_version: number;
  event_count: number;
  image_count: number;
  kernel_backend: string;
  last_event: EventRecord | null;
}

/** Per-day detection totals for one month; keys are day-of-month strings. */
export type CalendarCounts = Record<string, number>;

export type FieldErrors = Record<string, string>;

/** A 4xx response carrying the server's per-field diagnostics. */
export class ApiError extends Error {
  readonly status: number;
  readonly errors: FieldErrors;

  constructor(status: number, errors: FieldErrors) {
    const detail = Object.entries(errors)
      .map(([field, msg]) => `${field}: ${msg}`)
      .join("; ");
    super(`HTTP ${status}${detail ? ` — ${detail}` : ""}`);
    this.status = status;
    this.errors = errors;
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private readonly base: string;
  private readonly fetchImpl: FetchLike;

  constructor(base = "", fetchImpl: FetchLike = (...args) => fetch(...args)) {
    // strip a trailing slash so base + "/api/..." composes cleanly
    this.base = base.replace(/\/$/, "");
    this.fetchImpl = fetchImpl;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.base + path, init);
    if (!response.ok) {
      let errors: FieldErrors = {};
      try {
        const body = await response.json();
        if (body && typeof body === "object" && "errors" in body) {
          errors = body.errors as FieldErrors;
        }
      } catch {
        // non-JSON error body; keep the bare status
      }
      throw new ApiError(response.status, errors);
    }
    return (await response.json()) as T;
  }

  getStatus(): Promise<StatusInfo> {
    return this.request<StatusInfo>("/api/status");
  }

  getConfig(): Promise<ConfigEnvelope> {
    return this.request<ConfigEnvelope>("/api/config");
  }

  /** Partial update; resolves to the server's echo (new config + version). */
  putConfig(patch: Partial<DetectionConfig>): Promise<ConfigEnvelope> {
    return this.request<ConfigEnvelope>("/api/config", {
      method: "PUT",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(patch),
    });
  }

  capture(): Promise<{ event: EventRecord & { storage_seq: number } }> {
    return this.request("/api/capture", { method: "POST" });
  }

  getEvents(range: { from?: string; to?: string } = {}): Promise<EventRecord[]> {
    const params = new URLSearchParams();
    if (range.from) params.set("from", range.from);
    if (range.to) params.set("to", range.to);
    const query = params.toString();
    return this.request<EventRecord[]>(`/api/events${query ? `?${query}` : ""}`);
  }

  getCalendar(month: string): Promise<CalendarCounts> {
    return this.request<CalendarCounts>(
      `/api/calendar?month=${encodeURIComponent(month)}`,
    );
  }

  getWarnings(cursor: number): Promise<WarningBatch> {
    return this.request<WarningBatch>(`/api/warnings?cursor=${cursor}`);
  }

  /** URL for an image blob; format "png" asks the server to transcode. */
  imageUrl(contentId: string, format?: "png"): string {
    const suffix = format ? `?format=${format}` : "";
    return `${this.base}/api/images/${contentId}${suffix}`;
  }
}

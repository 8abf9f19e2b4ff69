/**
 * HTML renderers for each dashboard panel.
 *
 * Pure functions from API payloads to markup strings; the boot layer
 * assigns them to innerHTML. Keeping them DOM-free makes the "every
 * number comes from the server" rule directly testable in node.
 */

import type {
  ConfigEnvelope,
  DetectionConfig,
  EventRecord,
  FieldErrors,
  StatusInfo,
  WarningRow,
} from "./api.js";
import type { CalendarWeek } from "./calendar.js";

export function escapeHtml(value: unknown): string {
  return String(value)
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

export function formatUptime(seconds: number): string {
  const s = Math.floor(seconds);
  if (s < 60) return `${s}s`;
  if (s < 3600) return `${Math.floor(s / 60)}m ${s % 60}s`;
  return `${Math.floor(s / 3600)}h ${Math.floor((s % 3600) / 60)}m`;
}

export function renderStatus(status: StatusInfo): string {
  const last = status.last_event;
  const lastLine = last
    ? `event #${escapeHtml(last.seq)} at ${escapeHtml(last.ts)} — ` +
      `count ${escapeHtml(last.count)} (${escapeHtml(last.algorithm)})`
    : "no detections yet";
  return `
    <dl class="status-grid">
      <div><dt>Uptime</dt><dd>${formatUptime(status.uptime_s)}</dd></div>
      <div><dt>Frames processed</dt><dd>${escapeHtml(status.frames_processed)}</dd></div>
      <div><dt>Events stored</dt><dd>${escapeHtml(status.event_count)}</dd></div>
      <div><dt>Images stored</dt><dd>${escapeHtml(status.image_count)}</dd></div>
      <div><dt>Config version</dt><dd>${escapeHtml(status.config_version)}</dd></div>
      <div><dt>Kernel backend</dt><dd>${escapeHtml(status.kernel_backend)}</dd></div>
    </dl>
    <p class="last-event">${lastLine}</p>`;
}

const CONFIG_FIELDS: {
  name: keyof DetectionConfig;
  label: string;
  hint: string;
}[] = [
  { name: "t", label: "Grayscale threshold T", hint: "0–255; darker than T is foreground" },
  { name: "s", label: "Similarity threshold S (%)", hint: "at or above: count new arrivals only" },
  { name: "lower", label: "Min weevil area (px)", hint: "components below are ignored" },
  { name: "upper", label: "Max weevil area (px)", hint: "components above are ignored" },
  { name: "alert_threshold", label: "Alert at count", hint: "warning when a frame reaches this" },
];

/**
 * Settings form. `pending` holds the operator's unsubmitted edits so a
 * rejected submit re-renders with their values intact; the config values
 * themselves always come from the last server echo.
 */
export function renderSettingsForm(
  envelope: ConfigEnvelope,
  errors: FieldErrors = {},
  pending: Partial<Record<keyof DetectionConfig, string>> = {},
): string {
  const rows = CONFIG_FIELDS.map(({ name, label, hint }) => {
    const value = pending[name] ?? String(envelope.config[name]);
    const error = errors[name];
    return `
      <label class="field${error ? " field-error" : ""}">
        <span>${escapeHtml(label)}</span>
        <input name="${name}" value="${escapeHtml(value)}" inputmode="decimal">
        ${
          error
            ? `<span class="error-msg">${escapeHtml(error)}</span>`
            : `<span class="hint">${escapeHtml(hint)}</span>`
        }
      </label>`;
  }).join("");
  const unknown = Object.entries(errors)
    .filter(([field]) => !CONFIG_FIELDS.some((f) => f.name === field))
    .map(([field, msg]) => `<p class="error-msg">${escapeHtml(field)}: ${escapeHtml(msg)}</p>`)
    .join("");
  return `
    <form id="settings-form">
      ${rows}
      ${unknown}
      <footer>
        <span class="version">server version ${escapeHtml(envelope.version)}</span>
        <button type="submit">Apply</button>
      </footer>
    </form>`;
}

export function renderWarnings(rows: WarningRow[]): string {
  if (rows.length === 0) {
    return `<p class="empty">No warnings.</p>`;
  }
  const items = rows
    .map(
      (w) => `
      <li data-seq="${escapeHtml(w.seq)}">
        <time>${escapeHtml(w.ts)}</time>
        <span class="count">${escapeHtml(w.count)}</span>
        <span class="msg">${escapeHtml(w.message)}</span>
      </li>`,
    )
    .join("");
  return `<ol class="warning-list">${items}</ol>`;
}

export function renderCalendar(label: string, weeks: CalendarWeek[]): string {
  const head = ["Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"]
    .map((d) => `<th>${d}</th>`)
    .join("");
  const body = weeks
    .map((week) => {
      const cells = week
        .map((cell) => {
          if (cell === null) return `<td class="pad"></td>`;
          const count =
            cell.count === null
              ? ""
              : `<span class="day-count">${escapeHtml(cell.count)}</span>`;
          return `<td><span class="day-num">${cell.day}</span>${count}</td>`;
        })
        .join("");
      return `<tr>${cells}</tr>`;
    })
    .join("");
  return `
    <div class="cal-header">
      <button id="cal-prev" type="button">&larr;</button>
      <span class="cal-label">${escapeHtml(label)}</span>
      <button id="cal-next" type="button">&rarr;</button>
    </div>
    <table class="calendar"><thead><tr>${head}</tr></thead><tbody>${body}</tbody></table>`;
}

export function renderEvents(
  events: EventRecord[],
  imageUrl: (contentId: string, format?: "png") => string,
): string {
  if (events.length === 0) {
    return `<p class="empty">No events in range.</p>`;
  }
  const rows = events
    .map(
      (e) => `
      <tr>
        <td>${escapeHtml(e.seq)}</td>
        <td>${escapeHtml(e.ts)}</td>
        <td class="num">${escapeHtml(e.count)}</td>
        <td>${escapeHtml(e.algorithm)}</td>
        <td class="num">${e.similarity === null ? "—" : escapeHtml(e.similarity.toFixed(2))}</td>
        <td><img class="thumb" loading="lazy" alt="capture ${escapeHtml(e.seq)}"
             src="${escapeHtml(imageUrl(e.image_ref, "png"))}"></td>
      </tr>`,
    )
    .join("");
  return `
    <table class="events">
      <thead><tr><th>#</th><th>Time</th><th>Count</th><th>Algorithm</th><th>Similarity</th><th>Frame</th></tr></thead>
      <tbody>${rows}</tbody>
    </table>`;
}

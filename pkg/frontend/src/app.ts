/**
 * Boot layer: wires the render functions to the page and runs the poll
 * loops. This file owns all DOM access and all timers; everything it
 * displays comes from src/api.ts responses.
 */

import { ApiClient, ApiError, type ConfigEnvelope, type DetectionConfig } from "./api.js";
import { buildMonthGrid, monthLabel, shiftMonth } from "./calendar.js";
import { WarningFeed } from "./warnings.js";
import {
  renderCalendar,
  renderEvents,
  renderSettingsForm,
  renderStatus,
  renderWarnings,
} from "./views.js";

const STATUS_POLL_MS = 3000;
const WARNING_POLL_MS = 2000;

function panel(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing panel #${id}`);
  return el;
}

export function startDashboard(base = ""): void {
  const api = new ApiClient(base);
  const statusPanel = panel("status-panel");
  const settingsPanel = panel("settings-panel");
  const warningsPanel = panel("warnings-panel");
  const calendarPanel = panel("calendar-panel");
  const eventsPanel = panel("events-panel");
  const captureButton = panel("capture-button") as HTMLButtonElement;

  let envelope: ConfigEnvelope | null = null;
  let month = new Date().toISOString().slice(0, 7);
  const feed = new WarningFeed(api, window.localStorage);

  const refreshStatus = async () => {
    try {
      statusPanel.innerHTML = renderStatus(await api.getStatus());
    } catch {
      statusPanel.innerHTML = `<p class="empty">service unreachable</p>`;
    }
  };

  const refreshEvents = async () => {
    try {
      const events = await api.getEvents();
      eventsPanel.innerHTML = renderEvents(events.slice(-20), (id, fmt) =>
        api.imageUrl(id, fmt),
      );
    } catch {
      /* keep the last good table */
    }
  };

  const refreshCalendar = async () => {
    try {
      const counts = await api.getCalendar(month);
      calendarPanel.innerHTML = renderCalendar(
        monthLabel(month),
        buildMonthGrid(month, counts),
      );
      panel("cal-prev").onclick = () => {
        month = shiftMonth(month, -1);
        void refreshCalendar();
      };
      panel("cal-next").onclick = () => {
        month = shiftMonth(month, 1);
        void refreshCalendar();
      };
    } catch {
      /* keep the last good grid */
    }
  };

  const showSettings = (
    errors: Record<string, string> = {},
    pending: Partial<Record<keyof DetectionConfig, string>> = {},
  ) => {
    if (!envelope) return;
    settingsPanel.innerHTML = renderSettingsForm(envelope, errors, pending);
    const form = settingsPanel.querySelector("form");
    form?.addEventListener("submit", (event) => {
      event.preventDefault();
      void submitSettings(form as HTMLFormElement);
    });
  };

  const submitSettings = async (form: HTMLFormElement) => {
    const data = new FormData(form);
    const patch: Record<string, number> = {};
    const pending: Partial<Record<keyof DetectionConfig, string>> = {};
    for (const [name, raw] of data.entries()) {
      const text = String(raw).trim();
      pending[name as keyof DetectionConfig] = text;
      patch[name] = Number(text);
    }
    try {
      // only the server echo updates the displayed config
      envelope = await api.putConfig(patch);
      showSettings();
    } catch (err) {
      if (err instanceof ApiError) {
        showSettings(err.errors, pending);
      } else {
        showSettings({ _: "service unreachable" }, pending);
      }
    }
    void refreshStatus();
  };

  const pollWarnings = async () => {
    try {
      const fresh = await feed.poll();
      if (fresh.length > 0 || feed.rows.length === 0) {
        warningsPanel.innerHTML = renderWarnings(feed.rows);
      }
    } catch {
      /* retry on the next tick */
    }
  };

  captureButton.addEventListener("click", async () => {
    captureButton.disabled = true;
    try {
      await api.capture();
      await Promise.all([refreshStatus(), refreshEvents(), refreshCalendar()]);
      await pollWarnings();
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        captureButton.textContent = "frame source exhausted";
        return; // leave it disabled: there is nothing left to capture
      }
    } finally {
      if (captureButton.textContent === "Capture now") {
        captureButton.disabled = false;
      }
    }
  });

  void api.getConfig().then((env) => {
    envelope = env;
    showSettings();
  });
  void refreshStatus();
  void refreshEvents();
  void refreshCalendar();
  void pollWarnings();
  window.setInterval(() => void refreshStatus(), STATUS_POLL_MS);
  window.setInterval(() => void pollWarnings(), WARNING_POLL_MS);
}

// auto-boot when loaded as the page's module script
if (typeof document !== "undefined" && document.getElementById("status-panel")) {
  startDashboard();
}

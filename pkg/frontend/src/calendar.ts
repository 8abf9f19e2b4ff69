/**
 * Month-grid layout for the capture calendar.
 *
 * Pure date arithmetic: takes the server's per-day totals and produces a
 * week-aligned grid of cells. Days the server did not report stay blank —
 * the dashboard never invents a zero.
 */

import type { CalendarCounts } from "./api.js";

export interface DayCell {
  day: number;
  /** null when the server reported nothing for this day */
  count: number | null;
}

/** One display row, Monday first; null cells pad the month's edges. */
export type CalendarWeek = (DayCell | null)[];

export function monthLabel(month: string): string {
  const [year, mm] = month.split("-");
  const names = [
    "January",
    "February",
    "March",
    "April",
    "May",
    "June",
    "July",
    "August",
    "September",
    "October",
    "November",
    "December",
  ];
  const index = Number(mm) - 1;
  return `${names[index] ?? mm} ${year}`;
}

export function daysInMonth(month: string): number {
  const [year, mm] = month.split("-").map(Number);
  // day 0 of the next month is the last day of this one
  return new Date(Date.UTC(year!, mm!, 0)).getUTCDate();
}

/** 0 = Monday ... 6 = Sunday, for the 1st of the month. */
function mondayIndexOfFirst(month: string): number {
  const [year, mm] = month.split("-").map(Number);
  return (new Date(Date.UTC(year!, mm! - 1, 1)).getUTCDay() + 6) % 7;
}

export function buildMonthGrid(
  month: string,
  counts: CalendarCounts,
): CalendarWeek[] {
  const total = daysInMonth(month);
  const lead = mondayIndexOfFirst(month);
  const cells: (DayCell | null)[] = Array(lead).fill(null);
  for (let day = 1; day <= total; day += 1) {
    const reported = counts[String(day)];
    cells.push({ day, count: reported === undefined ? null : reported });
  }
  while (cells.length % 7 !== 0) cells.push(null);

  const weeks: CalendarWeek[] = [];
  for (let i = 0; i < cells.length; i += 7) {
    weeks.push(cells.slice(i, i + 7));
  }
  return weeks;
}

/** "2024-06" -> "2024-05"; used by the month navigation buttons. */
export function shiftMonth(month: string, delta: number): string {
  const [year, mm] = month.split("-").map(Number);
  const d = new Date(Date.UTC(year!, mm! - 1 + delta, 1));
  const y = d.getUTCFullYear();
  const m = String(d.getUTCMonth() + 1).padStart(2, "0");
  return `${y}-${m}`;
}

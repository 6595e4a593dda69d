/** Global temporal view (area chart + rectangle brush, continuous window
 * only) and cumulative temporal view (month/weekday/period bars with the
 * filtered overlay). */

import type { CumulativeBody, GlobalSeriesBody } from "../types";

export interface GlobalViewModel {
  labels: string[];
  counts: number[];
  maxCount: number;
  areaPath: string;            // unit coordinates: x in [0,1], y in [0,1]
  brush: [number, number] | null;
}

export function buildGlobalView(series: GlobalSeriesBody,
                                brush: [number, number] | null): GlobalViewModel {
  const counts = series.counts;
  const maxCount = Math.max(1, ...counts);
  const n = Math.max(counts.length - 1, 1);
  const points = counts.map((c, i) => `${(i / n).toFixed(4)},${(1 - c / maxCount).toFixed(4)}`);
  const areaPath = counts.length
    ? `M0,1L${points.join("L")}L1,1Z`
    : "";
  return { labels: series.labels, counts, maxCount, areaPath, brush };
}

export interface BarPair {
  label: string;
  base: number;
  overlay: number;
}

export interface CumulativeViewModel {
  byMonth: BarPair[];
  byWeekday: BarPair[];
  byPeriod: BarPair[];
}

const MONTHS = ["Jan", "Feb", "Mar", "Apr", "May", "Jun",
  "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"];
const WEEKDAYS = ["Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"];

function pairs(labels: string[], base: number[], overlay: number[]): BarPair[] {
  return labels.map((label, i) => ({ label, base: base[i], overlay: overlay[i] }));
}

export function buildCumulativeView(series: CumulativeBody): CumulativeViewModel {
  return {
    byMonth: pairs(MONTHS, series.base.by_month_of_year, series.overlay.by_month_of_year),
    byWeekday: pairs(WEEKDAYS, series.base.by_day_of_week, series.overlay.by_day_of_week),
    byPeriod: pairs(series.period_names, series.base.by_period_of_day,
      series.overlay.by_period_of_day),
  };
}

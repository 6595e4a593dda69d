/** Gauge widget: a semicircular dial per hotspot showing the crime count
 * (top number), the temporal rate of occurrence (bottom percentage) and the
 * hotspot's importance (pointer position). */

import type { GaugeBody } from "./types";

export interface GaugeModel {
  topNumber: string;        // crimes in the hotspot
  bottomPercent: string;    // share of time slices where the hotspot occurs
  pointerAngleDeg: number;  // -90 (importance 0) .. +90 (importance 1)
  importance: number;
  degenerate: boolean;
}

export function formatPercent(fraction: number, digits = 1): string {
  return `${(100 * fraction).toFixed(digits)}%`;
}

export function buildGaugeModel(gauge: GaugeBody): GaugeModel {
  const importance = Math.min(Math.max(gauge.importance, 0), 1);
  return {
    topNumber: String(gauge.crime_count),
    bottomPercent: formatPercent(gauge.frequency),
    pointerAngleDeg: -90 + 180 * importance,
    importance,
    degenerate: gauge.degenerate,
  };
}

const W = 120;
const H = 78;
const CX = W / 2;
const CY = 64;
const R = 46;

/** Static SVG for one gauge; pure string output so tests can snapshot it. */
export function renderGaugeSvg(model: GaugeModel): string {
  const angle = ((model.pointerAngleDeg - 90) * Math.PI) / 180;
  const tipX = (CX + R * 0.88 * Math.cos(angle)).toFixed(2);
  const tipY = (CY + R * 0.88 * Math.sin(angle)).toFixed(2);
  const ticks: string[] = [];
  for (let i = 0; i <= 4; i++) {
    const t = ((-180 + 45 * i) * Math.PI) / 180;
    const x1 = (CX + R * Math.cos(t)).toFixed(2);
    const y1 = (CY + R * Math.sin(t)).toFixed(2);
    const x2 = (CX + (R - 6) * Math.cos(t)).toFixed(2);
    const y2 = (CY + (R - 6) * Math.sin(t)).toFixed(2);
    ticks.push(`<line class="tick" x1="${x1}" y1="${y1}" x2="${x2}" y2="${y2}"/>`);
  }
  return [
    `<svg class="gauge${model.degenerate ? " degenerate" : ""}" viewBox="0 0 ${W} ${H}">`,
    `<path class="arc" d="M ${CX - R} ${CY} A ${R} ${R} 0 0 1 ${CX + R} ${CY}"/>`,
    ticks.join(""),
    `<line class="pointer" x1="${CX}" y1="${CY}" x2="${tipX}" y2="${tipY}"/>`,
    `<text class="count" x="${CX}" y="22" text-anchor="middle">${model.topNumber}</text>`,
    `<text class="frequency" x="${CX}" y="${H - 2}" text-anchor="middle">${model.bottomPercent}</text>`,
    `</svg>`,
  ].join("");
}

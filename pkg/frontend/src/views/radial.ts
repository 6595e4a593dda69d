/** Radial type view: one radial year x month bar chart per crime type with
 * its percentage share on top; the selected type gets a dashed border. */

import { formatPercent } from "../gauge";
import type { RadialBody } from "../types";

export interface RadialSector {
  year: number;
  bars: number[];     // 12 heights normalized to [0, 1]
  counts: number[];   // raw monthly counts
}

export interface RadialChart {
  type: string;
  shareLabel: string;  // percentage header
  share: number;
  dashed: boolean;     // selected type marker
  sectors: RadialSector[];
}

export interface RadialViewModel {
  years: number[];
  charts: RadialChart[];
}

export function buildRadialView(series: RadialBody,
                                selectedTypes: ReadonlySet<string>): RadialViewModel {
  const charts = series.types.map((type, t) => {
    const grid = series.grids[t];
    const peak = Math.max(1, ...grid.flat());
    return {
      type,
      shareLabel: formatPercent(series.shares[t] / 100),
      share: series.shares[t],
      dashed: selectedTypes.has(type),
      sectors: series.years.map((year, y) => ({
        year,
        bars: grid[y].map((count) => count / peak),
        counts: [...grid[y]],
      })),
    };
  });
  return { years: [...series.years], charts };
}

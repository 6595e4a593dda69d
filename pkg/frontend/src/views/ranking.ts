/** Ranking type view: one polyline per crime type, vertical position is the
 * per-slice rank (1 on top), line width proportional to the crime count. */

import type { RankingBody } from "../types";

export interface RankingPoint {
  slice: number;
  rank: number;
  count: number;
  width: number;   // stroke width, linear in count
}

export interface RankingLine {
  type: string;
  points: RankingPoint[];
}

export interface RankingViewModel {
  labels: string[];
  topCount: number;   // number of rank levels shown
  lines: RankingLine[];
}

export const MAX_STROKE = 12;
export const MIN_STROKE = 1;

export function strokeWidth(count: number, maxCount: number): number {
  if (maxCount <= 0 || count <= 0) return MIN_STROKE;
  return MIN_STROKE + (MAX_STROKE - MIN_STROKE) * (count / maxCount);
}

export function buildRankingView(series: RankingBody): RankingViewModel {
  const maxCount = Math.max(0, ...series.counts.flat());
  const lines = series.types.map((type, t) => ({
    type,
    points: series.ranks[t].map((rank, slice) => ({
      slice,
      rank,
      count: series.counts[t][slice],
      width: strokeWidth(series.counts[t][slice], maxCount),
    })),
  }));
  return { labels: series.labels, topCount: series.types.length, lines };
}

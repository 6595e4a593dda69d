/** Filter widget: year and crime-type histograms; clicking a bar toggles
 * that year or type out of the whole interface. */

import type { GlobalSeriesBody, RankingBody } from "../types";

export interface FilterBar {
  label: string;
  count: number;
  excluded: boolean;
}

export interface FilterWidgetModel {
  years: FilterBar[];
  types: FilterBar[];
}

export function buildFilterWidget(globalSeries: GlobalSeriesBody,
                                  ranking: RankingBody,
                                  allYears: number[],
                                  allTypes: string[],
                                  excludedYears: ReadonlySet<number>,
                                  excludedTypes: ReadonlySet<string>): FilterWidgetModel {
  const yearTotals = new Map<number, number>(allYears.map((y) => [y, 0]));
  globalSeries.labels.forEach((label, i) => {
    const year = Number(label.slice(0, 4));
    if (yearTotals.has(year)) {
      yearTotals.set(year, (yearTotals.get(year) ?? 0) + globalSeries.counts[i]);
    }
  });
  const typeTotals = new Map<string, number>(allTypes.map((t) => [t, 0]));
  ranking.types.forEach((type, t) => {
    typeTotals.set(type, ranking.counts[t].reduce((a, b) => a + b, 0));
  });
  return {
    years: allYears.map((year) => ({
      label: String(year),
      count: yearTotals.get(year) ?? 0,
      excluded: excludedYears.has(year),
    })),
    types: allTypes.map((type) => ({
      label: type,
      count: typeTotals.get(type) ?? 0,
      excluded: excludedTypes.has(type),
    })),
  };
}

/** Client-side session state: mirrors the server's filter facets plus the
 * current drawing, and caches the last response per view. */

import type {
  ChoroplethBody, CumulativeBody, DatasetMeta, GlobalSeriesBody,
  HotspotSummary, RadialBody, RankingBody, RegionBody, SelectRequest,
} from "./types";

export interface ViewState {
  sessionId: string | null;
  granularity: "month" | "day";
  drawing: SelectRequest | null;
  region: RegionBody | null;
  timeWindow: [number, number] | null;
  excludedYears: number[];
  excludedTypes: string[];
  selectedSite: string | null;
  selectedHotspot: number | null;
  /** types picked in the radial view (dashed border); the server sees them
   * as the complement being excluded */
  selectedRadialTypes: string[];
}

export interface ResponseCache {
  meta: DatasetMeta | null;
  choropleth: ChoroplethBody | null;
  global: GlobalSeriesBody | null;
  cumulative: CumulativeBody | null;
  ranking: RankingBody | null;
  radial: RadialBody | null;
  hotspots: HotspotSummary | null;
}

export function initialViewState(): ViewState {
  return {
    sessionId: null,
    granularity: "month",
    drawing: null,
    region: null,
    timeWindow: null,
    excludedYears: [],
    excludedTypes: [],
    selectedSite: null,
    selectedHotspot: null,
    selectedRadialTypes: [],
  };
}

export function emptyCache(): ResponseCache {
  return {
    meta: null,
    choropleth: null,
    global: null,
    cumulative: null,
    ranking: null,
    radial: null,
    hotspots: null,
  };
}

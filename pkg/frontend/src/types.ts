/** Payload types of the analytics API (mirrors the service's JSON shapes). */

export interface SessionInfo {
  session_id: string;
  dataset: string;
  granularity: "month" | "day";
  slice_count: number;
  has_region: boolean;
  has_model: boolean;
}

export interface RegionBody {
  site_ids: string[];
  provenance: string;
}

export interface FilterBody {
  region: RegionBody;
  time_window: [number, number] | null;
  excluded_years: number[];
  excluded_types: string[];
  site: string | null;
  hotspot: number | null;
}

export interface GlobalSeriesBody {
  granularity: string;
  labels: string[];
  counts: number[];
}

export interface CumulativeBlock {
  by_month_of_year: number[];
  by_day_of_week: number[];
  by_period_of_day: number[];
}

export interface CumulativeBody {
  base: CumulativeBlock;
  overlay: CumulativeBlock;
  period_names: string[];
}

export interface RankingBody {
  types: string[];
  labels: string[];
  ranks: number[][];
  counts: number[][];
}

export interface RadialBody {
  types: string[];
  years: number[];
  grids: number[][][];
  shares: number[];
}

export interface GaugeBody {
  crime_count: number;
  rate_of_crimes: number;
  frequency: number;
  importance: number;
  degenerate: boolean;
}

export interface HotspotSummary {
  k: number;
  dims: { m: number; n: number; k: number };
  memberships: string[][];
  noise_flags: boolean[];
  h_bin: number[][];
  gauges: GaugeBody[];
  objective: number;
  restart_objectives: number[];
  granularity: string;
  degenerate: boolean;
}

export interface ChoroplethBody {
  counts: Record<string, number>;
}

export interface GeoFeature {
  type: "Feature";
  properties: { site_id: string };
  geometry: { type: string; coordinates: unknown };
}

export interface DatasetMeta {
  dataset: string;
  record_count: number;
  crime_types: string[];
  years: number[];
  date_range: [string, string];
  site_count: number;
  geometry: { type: "FeatureCollection"; features: GeoFeature[] };
}

export type SelectionMode = "point" | "polyline" | "polygon" | "address";

export interface SelectRequest {
  mode: SelectionMode;
  geometry?: number[] | number[][];
  address?: string;
  buffer_m?: number;
  expand_rings?: number;
}

export interface FilterRequest {
  time_window?: [number, number] | null;
  excluded_years?: number[] | null;
  excluded_types?: string[] | null;
  site?: string | null;
  hotspot?: number | null;
}

export interface RecomputeRequest {
  k: number;
  granularity: "month" | "day";
}

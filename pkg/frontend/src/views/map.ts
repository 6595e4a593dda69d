/** Map view model: choropleth fill classes, region membership and the
 * selected-site texture flag for every site polygon. */

import type { ChoroplethBody, DatasetMeta, GeoFeature, RegionBody } from "../types";

// sequential scale with fixed breaks (fractions of the max count)
export const FILL_BREAKS = [0.0, 0.05, 0.1, 0.2, 0.35, 0.55, 0.75, 1.0];

export interface MapSite {
  siteId: string;
  count: number;
  fillClass: number;     // 0 (empty) .. FILL_BREAKS.length-1 (hottest)
  inRegion: boolean;
  highlighted: boolean;  // textured when selected as the site filter
  path: string;          // SVG path in lon/lat units
}

export interface MapViewModel {
  sites: MapSite[];
  maxCount: number;
  breaks: number[];
}

export function fillClass(count: number, maxCount: number): number {
  if (count <= 0 || maxCount <= 0) return 0;
  const fraction = count / maxCount;
  let cls = 1;
  for (let i = 1; i < FILL_BREAKS.length; i++) {
    if (fraction > FILL_BREAKS[i]) cls = i + 1;
  }
  return Math.min(cls, FILL_BREAKS.length - 1);
}

function ringToPath(ring: number[][]): string {
  const parts = ring.map(([x, y], i) => `${i === 0 ? "M" : "L"}${x},${y}`);
  return parts.join("") + "Z";
}

export function featurePath(feature: GeoFeature): string {
  const geom = feature.geometry;
  const polygons: number[][][][] = geom.type === "Polygon"
    ? [geom.coordinates as number[][][]]
    : (geom.coordinates as number[][][][]);
  return polygons.map((rings) => rings.map(ringToPath).join("")).join("");
}

export function buildMapView(meta: DatasetMeta, choropleth: ChoroplethBody,
                             region: RegionBody | null,
                             selectedSite: string | null): MapViewModel {
  const counts = choropleth.counts;
  const maxCount = Math.max(0, ...Object.values(counts));
  const inRegion = new Set(region?.site_ids ?? []);
  const sites = meta.geometry.features.map((feature) => {
    const siteId = feature.properties.site_id;
    const count = counts[siteId] ?? 0;
    return {
      siteId,
      count,
      fillClass: fillClass(count, maxCount),
      inRegion: inRegion.has(siteId),
      highlighted: selectedSite === siteId,
      path: featurePath(feature),
    };
  });
  return { sites, maxCount, breaks: [...FILL_BREAKS] };
}

/** Hotspot view model: one small map per hotspot plus its gauge. Untouched
 * by filters; only an explicit recompute replaces the underlying model. */

import { buildGaugeModel, GaugeModel } from "../gauge";
import type { DatasetMeta, HotspotSummary, RegionBody } from "../types";
import { featurePath } from "./map";

export interface HotspotCard {
  index: number;
  memberSites: string[];
  noise: boolean;
  selected: boolean;
  gauge: GaugeModel;
  activeSlices: number[];  // slice indices where the binarized intensity is 1
  miniMap: { siteId: string; member: boolean; path: string }[];
}

export interface HotspotViewModel {
  available: boolean;
  k: number;
  granularity: string | null;
  cards: HotspotCard[];
}

export function buildHotspotView(meta: DatasetMeta, model: HotspotSummary | null,
                                 region: RegionBody | null,
                                 selectedHotspot: number | null): HotspotViewModel {
  if (!model) {
    return { available: false, k: 0, granularity: null, cards: [] };
  }
  const regionSites = new Set(region?.site_ids ?? []);
  const features = meta.geometry.features.filter(
    (f) => regionSites.size === 0 || regionSites.has(f.properties.site_id));
  const cards = model.memberships.map((members, index) => {
    const memberSet = new Set(members);
    return {
      index,
      memberSites: [...members].sort(),
      noise: model.noise_flags[index],
      selected: selectedHotspot === index,
      gauge: buildGaugeModel(model.gauges[index]),
      activeSlices: model.h_bin[index]
        .map((v, slice) => (v === 1 ? slice : -1))
        .filter((slice) => slice >= 0),
      miniMap: features.map((f) => ({
        siteId: f.properties.site_id,
        member: memberSet.has(f.properties.site_id),
        path: featurePath(f),
      })),
    };
  });
  return { available: true, k: model.k, granularity: model.granularity, cards };
}

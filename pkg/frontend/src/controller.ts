/** The linked-views controller.
 *
 * Every interaction calls the API, updates the client state and refreshes
 * exactly the views its facet is wired to: filter and selection changes
 * refetch the choropleth and the four temporal/type series, while the
 * hotspot view keeps its cached model until the explicit recompute action.
 * Rendering inputs are pure view models built from (state, cached
 * responses), so replaying a recorded interaction script reproduces them
 * identically.
 */

import { Api, ApiClient } from "./api";
import { emptyCache, initialViewState, ResponseCache, ViewState } from "./state";
import type { FilterRequest, SelectRequest } from "./types";
import { buildFilterWidget, FilterWidgetModel } from "./views/filter";
import { buildHotspotView, HotspotViewModel } from "./views/hotspot";
import { buildMapView, MapViewModel } from "./views/map";
import { buildRadialView, RadialViewModel } from "./views/radial";
import { buildRankingView, RankingViewModel } from "./views/ranking";
import {
  buildCumulativeView, buildGlobalView, CumulativeViewModel, GlobalViewModel,
} from "./views/temporal";

export type ViewName =
  | "map" | "hotspot" | "global" | "cumulative" | "ranking" | "radial" | "filterWidget";

export const SERIES_VIEWS: ViewName[] = ["map", "global", "cumulative", "ranking",
  "radial", "filterWidget"];

export interface ViewModels {
  map: MapViewModel | null;
  hotspot: HotspotViewModel;
  global: GlobalViewModel | null;
  cumulative: CumulativeViewModel | null;
  ranking: RankingViewModel | null;
  radial: RadialViewModel | null;
  filterWidget: FilterWidgetModel | null;
}

type Listener = (changed: ReadonlySet<ViewName>) => void;

export class LinkedViews {
  readonly state: ViewState = initialViewState();
  readonly cache: ResponseCache = emptyCache();
  private api: Api;
  private listeners: Listener[] = [];

  constructor(client: ApiClient) {
    this.api = new Api(client);
  }

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
  }

  private notify(changed: ViewName[]): void {
    const set = new Set(changed);
    for (const listener of this.listeners) listener(set);
  }

  async init(dataset?: string): Promise<void> {
    const session = await this.api.createSession(dataset);
    this.state.sessionId = session.session_id;
    this.state.granularity = session.granularity;
    this.cache.meta = await this.api.meta();
    this.notify(["map", "filterWidget"]);
  }

  /** Refetch every view wired to the filter facets (all but hotspots). */
  private async refreshSeries(): Promise<void> {
    this.cache.choropleth = await this.api.choropleth();
    this.cache.global = await this.api.globalSeries();
    this.cache.cumulative = await this.api.cumulativeSeries();
    this.cache.ranking = await this.api.rankingSeries();
    this.cache.radial = await this.api.radialSeries();
  }

  async selectRegion(selection: SelectRequest): Promise<void> {
    this.state.drawing = selection;
    this.state.region = await this.api.select(selection);
    // the server clears site/hotspot sub-selections with the old region
    this.state.selectedSite = null;
    this.state.selectedHotspot = null;
    await this.refreshSeries();
    this.notify([...SERIES_VIEWS]);
  }

  private async applyFilter(body: FilterRequest): Promise<void> {
    const echo = await this.api.setFilter(body);
    this.state.timeWindow = echo.time_window;
    this.state.excludedYears = [...echo.excluded_years].sort((a, b) => a - b);
    this.state.excludedTypes = [...echo.excluded_types].sort();
    this.state.selectedSite = echo.site;
    this.state.selectedHotspot = echo.hotspot;
    await this.refreshSeries();
    this.notify([...SERIES_VIEWS]);
  }

  /** Rectangle brush on the global temporal view (continuous window only). */
  brushTime(window: [number, number] | null): Promise<void> {
    return this.applyFilter({ time_window: window });
  }

  toggleYear(year: number): Promise<void> {
    const years = new Set(this.state.excludedYears);
    if (years.has(year)) years.delete(year);
    else years.add(year);
    return this.applyFilter({ excluded_years: [...years].sort((a, b) => a - b) });
  }

  toggleType(crimeType: string): Promise<void> {
    const types = new Set(this.state.excludedTypes);
    if (types.has(crimeType)) types.delete(crimeType);
    else types.add(crimeType);
    return this.applyFilter({ excluded_types: [...types].sort() });
  }

  selectSite(site: string | null): Promise<void> {
    return this.applyFilter({ site });
  }

  selectHotspot(index: number | null): Promise<void> {
    return this.applyFilter({ hotspot: index });
  }

  /** Clicking a radial chart focuses the data on that crime type (the
   * server sees the complement as excluded); clicking again releases it. */
  selectRadialType(crimeType: string): Promise<void> {
    const selected = new Set(this.state.selectedRadialTypes);
    if (selected.has(crimeType)) selected.delete(crimeType);
    else selected.add(crimeType);
    this.state.selectedRadialTypes = [...selected].sort();
    const allTypes = this.cache.meta?.crime_types ?? [];
    const excluded = selected.size
      ? allTypes.filter((t) => !selected.has(t)).sort()
      : [];
    return this.applyFilter({ excluded_types: excluded });
  }

  /** The "Hotspots" button: factorize under the current filter snapshot. */
  async recompute(k: number, granularity?: "month" | "day"): Promise<void> {
    const body = { k, granularity: granularity ?? this.state.granularity };
    this.cache.hotspots = await this.api.recompute(body);
    this.state.granularity = body.granularity;
    this.state.selectedHotspot = null;
    await this.refreshSeries();
    this.notify(["hotspot", ...SERIES_VIEWS]);
  }

  /** Pure function of (state, cache); no fetching, no mutation. */
  viewModels(): ViewModels {
    const { meta, choropleth, global, cumulative, ranking, radial, hotspots } = this.cache;
    return {
      map: meta && choropleth
        ? buildMapView(meta, choropleth, this.state.region, this.state.selectedSite)
        : null,
      hotspot: buildHotspotView(meta ?? emptyMeta(), hotspots, this.state.region,
        this.state.selectedHotspot),
      global: global ? buildGlobalView(global, this.state.timeWindow) : null,
      cumulative: cumulative ? buildCumulativeView(cumulative) : null,
      ranking: ranking ? buildRankingView(ranking) : null,
      radial: radial
        ? buildRadialView(radial, new Set(this.state.selectedRadialTypes))
        : null,
      filterWidget: meta && global && ranking
        ? buildFilterWidget(global, ranking, meta.years, meta.crime_types,
          new Set(this.state.excludedYears), new Set(this.state.excludedTypes))
        : null,
    };
  }
}

function emptyMeta() {
  return {
    dataset: "", record_count: 0, crime_types: [], years: [],
    date_range: ["", ""] as [string, string], site_count: 0,
    geometry: { type: "FeatureCollection" as const, features: [] },
  };
}

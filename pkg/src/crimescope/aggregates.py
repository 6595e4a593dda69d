"""Temporal analytics: filters and every aggregate the linked views consume.

All series are computed from one shared record mask, so the consistency
invariants (facet totals agree, filters commute, overlays never exceed the
base) hold by construction and are merely re-checked by the tests.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .catalog import (CrimeCatalog, CrimeMatrix, TimeSlicing,
                      count_matrix_entries, normalize_type)
from .errors import FilterError
from .geometry import AdjacencyGraph, Region


@dataclass(frozen=True)
class FilterState:
    """The linked-view filter contract: space, time and type facets.

    Facets compose by intersection, so applying them in any order yields the
    same record set. `selected_hotspot` refers to a hotspot index of the
    session's current model; its membership must be resolved by the caller
    (see `memberships` argument on the aggregate functions).
    """

    region: Region
    time_window: tuple | None = None  # inclusive (first_slice, last_slice)
    excluded_years: frozenset = frozenset()
    excluded_types: frozenset = frozenset()
    selected_site: str | None = None
    selected_hotspot: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "excluded_years", frozenset(self.excluded_years))
        object.__setattr__(self, "excluded_types",
                           frozenset(normalize_type(t) for t in self.excluded_types))

    def without_time_and_type(self) -> "FilterState":
        return replace(self, time_window=None, excluded_years=frozenset(),
                       excluded_types=frozenset())


def record_mask(catalog: CrimeCatalog, slicing: TimeSlicing, filt: FilterState,
                memberships=None) -> np.ndarray:
    """Boolean mask over catalog records selected by the filter."""
    sites = set(filt.region.site_ids)
    if filt.selected_site is not None:
        if filt.selected_site not in sites:
            raise FilterError(f"selected site {filt.selected_site} outside region")
        sites = {filt.selected_site}
    if filt.selected_hotspot is not None:
        if memberships is None:
            raise FilterError("hotspot filter needs the model memberships")
        if not 0 <= filt.selected_hotspot < len(memberships):
            raise FilterError(f"hotspot index {filt.selected_hotspot} out of range")
        sites &= set(memberships[filt.selected_hotspot])

    site_ok = np.zeros(len(catalog.site_ids), dtype=bool)
    for site in sites:
        code = catalog.site_code(site)
        if code >= 0:
            site_ok[code] = True
    mask = site_ok[catalog.site_codes]

    cols = slicing.assign(catalog)
    mask &= cols >= 0
    if filt.time_window is not None:
        lo, hi = filt.time_window
        if not (0 <= lo <= hi < len(slicing)):
            raise FilterError(f"time window {filt.time_window} outside slicing")
        mask &= (cols >= lo) & (cols <= hi)
    if filt.excluded_years:
        year_ok = ~np.isin(catalog.years, sorted(filt.excluded_years))
        mask &= year_ok
    if filt.excluded_types:
        type_bad = np.array([t in filt.excluded_types for t in catalog.crime_types], dtype=bool)
        mask &= ~type_bad[catalog.type_codes]
    return mask


def build_matrix(catalog: CrimeCatalog, slicing: TimeSlicing, filt: FilterState,
                 memberships=None) -> CrimeMatrix:
    """Region count matrix restricted by the filter (all-zero is valid)."""
    mask = record_mask(catalog, slicing, filt, memberships)
    return count_matrix_entries(catalog, slicing, filt.region.site_ids, mask=mask)


def global_series(catalog: CrimeCatalog, slicing: TimeSlicing, filt: FilterState,
                  memberships=None) -> np.ndarray:
    """Per-slice total counts over the filtered region."""
    mask = record_mask(catalog, slicing, filt, memberships)
    cols = slicing.assign(catalog)[mask]
    return np.bincount(cols, minlength=len(slicing)).astype(np.int64)


@dataclass(frozen=True)
class CumulativeSeries:
    by_month_of_year: np.ndarray  # (12,)
    by_day_of_week: np.ndarray  # (7,) Monday first
    by_period_of_day: np.ndarray  # (4,) night/morning/afternoon/evening
    overlay: "CumulativeSeries | None" = None


def _cumulative_arrays(catalog, mask):
    months = np.bincount(catalog.months[mask] - 1, minlength=12).astype(np.int64)
    weekdays = np.bincount(catalog.weekdays[mask], minlength=7).astype(np.int64)
    periods = np.bincount(catalog.hours[mask] // 6, minlength=4).astype(np.int64)
    return months, weekdays, periods


def cumulative_series(catalog: CrimeCatalog, slicing: TimeSlicing, filt: FilterState,
                      overlay_filter: FilterState | None = None,
                      memberships=None) -> CumulativeSeries:
    """Counts accumulated by month of year, day of week and period of day.

    When `overlay_filter` is given it must refine `filt` (select a subset of
    its records); the overlay arrays are returned alongside the base.
    """
    mask = record_mask(catalog, slicing, filt, memberships)
    base = CumulativeSeries(*_cumulative_arrays(catalog, mask))
    if overlay_filter is None:
        return base
    overlay_mask = record_mask(catalog, slicing, overlay_filter, memberships)
    if np.any(overlay_mask & ~mask):
        raise FilterError("overlay filter is not a refinement of the base filter")
    overlay = CumulativeSeries(*_cumulative_arrays(catalog, overlay_mask))
    return CumulativeSeries(base.by_month_of_year, base.by_day_of_week,
                            base.by_period_of_day, overlay)


@dataclass(frozen=True)
class RankingSeries:
    """Per-slice rank (1 = most crimes) and count for each displayed type."""

    types: tuple  # displayed types, strongest windowed total first
    ranks: np.ndarray  # (T, n) int, rank of each type per slice
    counts: np.ndarray  # (T, n) int, crimes of each type per slice


def ranking_series(catalog: CrimeCatalog, slicing: TimeSlicing, filt: FilterState,
                   top_t: int = 5, memberships=None) -> RankingSeries:
    if top_t < 1:
        raise FilterError("top_t must be >= 1")
    mask = record_mask(catalog, slicing, filt, memberships)
    cols = slicing.assign(catalog)
    n = len(slicing)
    per_type = {}
    for code, crime_type in enumerate(catalog.crime_types):
        tmask = mask & (catalog.type_codes == code)
        if not tmask.any():
            continue
        per_type[crime_type] = np.bincount(cols[tmask], minlength=n).astype(np.int64)

    # Ties on the windowed total break alphabetically; per-slice ties break by
    # (higher windowed total, then type code) so the lines stay stable.
    ordered = sorted(per_type, key=lambda t: (-per_type[t].sum(), t))[:top_t]
    counts = np.array([per_type[t] for t in ordered], dtype=np.int64) if ordered \
        else np.zeros((0, n), dtype=np.int64)
    ranks = np.zeros_like(counts)
    for j in range(n):
        order = sorted(range(len(ordered)), key=lambda i: (-counts[i, j], i))
        for rank, i in enumerate(order, start=1):
            ranks[i, j] = rank
    return RankingSeries(tuple(ordered), ranks, counts)


@dataclass(frozen=True)
class RadialSeries:
    """Per-type year x month grids plus each type's share of the displayed total."""

    types: tuple
    years: tuple
    grids: np.ndarray  # (T, Y, 12) counts
    shares: np.ndarray  # (T,) percentages over displayed types


def radial_series(catalog: CrimeCatalog, slicing: TimeSlicing, filt: FilterState,
                  top_t: int = 5, memberships=None) -> RadialSeries:
    mask = record_mask(catalog, slicing, filt, memberships)
    years = tuple(range(catalog.date_range[0].year, catalog.date_range[1].year + 1))
    year_index = {y: i for i, y in enumerate(years)}

    totals = {}
    for code, crime_type in enumerate(catalog.crime_types):
        count = int(np.count_nonzero(mask & (catalog.type_codes == code)))
        if count:
            totals[crime_type] = count
    ordered = sorted(totals, key=lambda t: (-totals[t], t))[:top_t]

    grids = np.zeros((len(ordered), len(years), 12), dtype=np.int64)
    for ti, crime_type in enumerate(ordered):
        code = catalog.type_code(crime_type)
        tmask = mask & (catalog.type_codes == code)
        for year, month in zip(catalog.years[tmask], catalog.months[tmask]):
            yi = year_index.get(int(year))
            if yi is not None:
                grids[ti, yi, int(month) - 1] += 1
    displayed_total = sum(totals[t] for t in ordered)
    if displayed_total:
        shares = np.array([100.0 * totals[t] / displayed_total for t in ordered])
    else:
        shares = np.zeros(len(ordered))
    return RadialSeries(tuple(ordered), years, grids, shares)


@dataclass(frozen=True)
class NearRepeatPair:
    first_site: str
    second_site: str
    crime_type: str
    first_time: object  # datetime
    second_time: object
    delta_days: float


def near_repeat_pairs(catalog: CrimeCatalog, region: Region,
                      adjacency: AdjacencyGraph | None = None,
                      window_days: int = 30, include_neighbors: bool = False,
                      crime_type: str | None = None) -> list:
    """Ordered same-type event pairs less than `window_days` apart.

    Pairs share a site, or sit on queen-adjacent sites when
    `include_neighbors` is set (which then requires `adjacency`).
    """
    if window_days <= 0:
        raise FilterError("window_days must be positive")
    if include_neighbors and adjacency is None:
        raise FilterError("include_neighbors requires an adjacency graph")
    sites = set(region.site_ids)
    wanted_type = normalize_type(crime_type) if crime_type else None

    events = [r for r in catalog.records
              if r.site_id in sites and (wanted_type is None or r.crime_type == wanted_type)]
    by_type = {}
    for r in events:
        by_type.setdefault(r.crime_type, []).append(r)

    window = window_days * 1440  # strict bound, in minutes
    pairs = []
    for group in by_type.values():
        group.sort(key=lambda r: (r.timestamp, r.site_id))
        minutes = [r.timestamp.toordinal() * 1440 + r.timestamp.hour * 60 + r.timestamp.minute
                   for r in group]
        for i, first in enumerate(group):
            for j in range(i + 1, len(group)):
                delta = minutes[j] - minutes[i]
                if delta >= window:
                    break
                if delta <= 0:
                    continue
                second = group[j]
                if first.site_id == second.site_id or (
                        include_neighbors and adjacency.are_adjacent(first.site_id, second.site_id)):
                    pairs.append(NearRepeatPair(first.site_id, second.site_id,
                                                first.crime_type, first.timestamp,
                                                second.timestamp, delta / 1440.0))
    pairs.sort(key=lambda p: (p.first_time, p.second_time, p.first_site, p.second_site))
    return pairs

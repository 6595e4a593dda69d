"""Service operations shared by the HTTP handlers and the CLI.

Every function here returns plain JSON-ready dicts shaped like the pydantic
response models, so the two surfaces cannot drift apart.
"""

from __future__ import annotations

from datetime import datetime, timedelta

import numpy as np

from .aggregates import (FilterState, cumulative_series, global_series,
                         radial_series, ranking_series, record_mask)
from .baseline import gi_star, ssi_compare
from .catalog import PERIOD_NAMES, TimeSlicing, count_matrix_entries
from .errors import FilterError, GeometryError
from .geometry import (Region, expand_region, region_from_site_ids,
                       select_by_address, select_by_point, select_by_polygon,
                       select_by_polyline)
from .hotspots import NmfConfig, factorize, gauge, nmf_site_labels, with_rank


def resolve_slice_index(slicing: TimeSlicing, value, clamp_end=False) -> int:
    """A time-window endpoint is a slice index or an ISO date."""
    if isinstance(value, int) and not isinstance(value, bool):
        if not 0 <= value < len(slicing):
            raise FilterError(f"slice index {value} outside 0..{len(slicing) - 1}")
        return value
    try:
        moment = datetime.strptime(str(value), "%Y-%m-%d")
    except ValueError:
        raise FilterError(f"cannot parse time-window entry {value!r} (want index or YYYY-MM-DD)")
    for i, (start, end) in enumerate(slicing.slices):
        if start <= moment < end:
            return i
    if clamp_end and moment >= slicing.slices[-1][1]:
        return len(slicing) - 1
    raise FilterError(f"date {value} outside the sliced range")


def resolve_time_window(slicing: TimeSlicing, window) -> tuple:
    if window is None:
        return None
    if len(window) != 2:
        raise FilterError("time_window must have exactly two entries")
    lo = resolve_slice_index(slicing, window[0])
    hi = resolve_slice_index(slicing, window[1], clamp_end=True)
    if hi < lo:
        raise FilterError("time_window end precedes start")
    return (lo, hi)


def remap_time_window(window, old: TimeSlicing, new: TimeSlicing):
    """Carry an index window across a granularity change, date-faithfully."""
    if window is None or old.granularity == new.granularity:
        return window
    lo_date = old.slices[window[0]][0]
    hi_date = old.slices[window[1]][1] - timedelta(minutes=1)  # last covered moment
    lo = next((i for i, (s, e) in enumerate(new.slices) if s <= lo_date < e), 0)
    hi = next((i for i, (s, e) in enumerate(new.slices) if s <= hi_date < e), len(new) - 1)
    return (lo, hi)


def select_region(dataset, mode: str, geometry=None, address=None,
                  buffer_m=None, expand_rings: int = 0,
                  default_buffer_m: float = 50.0) -> Region:
    geom = dataset.geometry
    if mode == "point":
        if not geometry or len(geometry) != 2 or not all(
                isinstance(v, (int, float)) for v in geometry):
            raise GeometryError("point selection needs geometry=[lon, lat]")
        region = select_by_point(geom, geometry)
    elif mode == "polyline":
        if not geometry:
            raise GeometryError("polyline selection needs a list of points")
        region = select_by_polyline(geom, geometry, buffer_m or default_buffer_m)
    elif mode == "polygon":
        if not geometry:
            raise GeometryError("polygon selection needs a ring of points")
        region = select_by_polygon(geom, geometry)
    elif mode == "address":
        if not address:
            raise GeometryError("address selection needs an address")
        region = select_by_address(geom, dataset.geocoder, address)
    else:
        raise GeometryError(f"unknown selection mode {mode!r}")
    if expand_rings:
        region = expand_region(region, dataset.adjacency, expand_rings)
    return region


def region_from_whole(dataset) -> Region:
    return region_from_site_ids(dataset.geometry, dataset.geometry.site_ids)


def region_payload(region: Region) -> dict:
    return {"site_ids": list(region.site_ids), "provenance": region.provenance}


def filter_payload(filt: FilterState) -> dict:
    return {
        "region": region_payload(filt.region),
        "time_window": list(filt.time_window) if filt.time_window else None,
        "excluded_years": sorted(filt.excluded_years),
        "excluded_types": sorted(filt.excluded_types),
        "site": filt.selected_site,
        "hotspot": filt.selected_hotspot,
    }


def global_payload(dataset, slicing, filt, memberships=None) -> dict:
    counts = global_series(dataset.catalog, slicing, filt, memberships)
    return {"granularity": slicing.granularity, "labels": slicing.labels(),
            "counts": [int(c) for c in counts]}


def cumulative_payload(dataset, slicing, filt, memberships=None) -> dict:
    """Base distribution of the region with the current filter overlaid."""
    base_filter = filt.without_time_and_type()
    series = cumulative_series(dataset.catalog, slicing, base_filter,
                               overlay_filter=filt, memberships=memberships)

    def block(months, weekdays, periods):
        return {"by_month_of_year": [int(v) for v in months],
                "by_day_of_week": [int(v) for v in weekdays],
                "by_period_of_day": [int(v) for v in periods]}

    return {
        "base": block(series.by_month_of_year, series.by_day_of_week, series.by_period_of_day),
        "overlay": block(series.overlay.by_month_of_year, series.overlay.by_day_of_week,
                         series.overlay.by_period_of_day),
        "period_names": list(PERIOD_NAMES),
    }


def ranking_payload(dataset, slicing, filt, top_t=5, memberships=None) -> dict:
    series = ranking_series(dataset.catalog, slicing, filt, top_t, memberships)
    return {"types": list(series.types), "labels": slicing.labels(),
            "ranks": series.ranks.tolist(), "counts": series.counts.tolist()}


def radial_payload(dataset, slicing, filt, top_t=5, memberships=None) -> dict:
    series = radial_series(dataset.catalog, slicing, filt, top_t, memberships)
    return {"types": list(series.types), "years": list(series.years),
            "grids": series.grids.tolist(),
            "shares": [float(s) for s in series.shares]}


def choropleth_payload(dataset, slicing, filt) -> dict:
    """Per-site counts under the time/year/type facets, across all sites.

    Spatial facets highlight on the map rather than blank it, so they do not
    restrict the recolor counts.
    """
    whole = FilterState(region=region_from_site_ids(dataset.geometry, dataset.geometry.site_ids),
                        time_window=filt.time_window, excluded_years=filt.excluded_years,
                        excluded_types=filt.excluded_types)
    mask = record_mask(dataset.catalog, slicing, whole)
    catalog = dataset.catalog
    per_site = np.bincount(catalog.site_codes[mask], minlength=len(catalog.site_ids))
    counts = {site: 0 for site in dataset.geometry.site_ids}
    counts.update({site: int(c) for site, c in zip(catalog.site_ids, per_site)})
    return {"counts": counts}


def hotspot_payload(model, granularity: str) -> dict:
    gauges = [gauge(model, i) for i in range(model.k)]
    return {
        "k": model.k,
        "dims": {"m": len(model.row_sites), "n": model.H.shape[1], "k": model.k},
        "memberships": [list(m) for m in model.memberships],
        "noise_flags": list(model.noise_flags),
        "h_bin": [[int(v) for v in row] for row in model.H_bin],
        "gauges": [
            {"crime_count": g.crime_count, "rate_of_crimes": g.rate_of_crimes,
             "frequency": g.frequency, "importance": g.importance,
             "degenerate": g.degenerate}
            for g in gauges
        ],
        "objective": model.objective,
        "restart_objectives": list(model.restart_objectives),
        "granularity": granularity,
        "degenerate": model.degenerate,
    }


def recompute_hotspots(dataset, filt, k: int, granularity: str,
                       nmf_defaults: NmfConfig, memberships=None):
    """Factorize the region matrix under the current filter snapshot."""
    slicing = dataset.catalog.default_slicing(granularity)
    mask = record_mask(dataset.catalog, slicing, filt, memberships)
    matrix = count_matrix_entries(dataset.catalog, slicing, filt.region.site_ids, mask=mask)
    model = factorize(matrix, with_rank(nmf_defaults, k))
    return model, slicing


def compare_payload(dataset, filt, confidence: float, k: int,
                    nmf_defaults: NmfConfig, slicing=None) -> dict:
    """NMF-vs-Gi* agreement over the current region.

    Both detectors see the same time/year/type-filtered matrix; spatial
    sub-selections (site, hotspot) are ignored so the comparison always
    covers the whole region.
    """
    if slicing is None:
        slicing = dataset.catalog.default_slicing("month")
    region_filter = FilterState(region=filt.region, time_window=filt.time_window,
                                excluded_years=filt.excluded_years,
                                excluded_types=filt.excluded_types)
    mask = record_mask(dataset.catalog, slicing, region_filter)
    matrix = count_matrix_entries(dataset.catalog, slicing, filt.region.site_ids, mask=mask)
    model = factorize(matrix, with_rank(nmf_defaults, k))
    nmf_labels = nmf_site_labels(model)
    gi = gi_star(matrix.X.sum(axis=1), dataset.adjacency, matrix.row_sites, confidence)
    gi_labels = {s: bool(l) for s, l in zip(matrix.row_sites, gi.labels)}
    report = ssi_compare(nmf_labels, gi_labels)
    return {
        "ssi": report.ssi,
        "counts": report.counts,
        "categories": dict(sorted(report.categories.items())),
        "z_scores": {s: float(z) for s, z in zip(gi.sites, gi.z_scores)},
        "p_values": {s: float(p) for s, p in zip(gi.sites, gi.p_values)},
    }


def dataset_meta(dataset) -> dict:
    from .geometry import geometry_to_geojson

    catalog = dataset.catalog
    return {
        "dataset": dataset.label,
        "record_count": catalog.record_count,
        "crime_types": list(catalog.crime_types),
        "years": list(range(catalog.date_range[0].year, catalog.date_range[1].year + 1)),
        "date_range": [catalog.date_range[0].strftime("%Y-%m-%d"),
                       catalog.date_range[1].strftime("%Y-%m-%d")],
        "site_count": len(dataset.geometry),
        "geometry": geometry_to_geojson(dataset.geometry),
    }

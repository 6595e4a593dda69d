"""Synthetic corpora: the 25-site benchmark region and a desk-scale city.

The benchmark region plants four archetype sites on a 5x5 grid over 60
monthly slices: two correlated high-volume sites (A, B), one frequent
low-volume site (C) and one quiet site with two spikes (D). The desk-scale
city plants the same archetypes per k-means cluster of a 20x20 grid, which
is the reduced-scale stand-in for a full-city NMF-vs-Gi* comparison.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime

import numpy as np
from shapely.geometry import Polygon

from .baseline import RegionClustering, kmeans_regions
from .catalog import CrimeCatalog, CrimeRecord, TimeSlicing
from .geometry import SiteGeometrySet, build_adjacency

CORPUS_MONTHS = 60
SPIKE_SLICES = {35: 15, 47: 10}  # 0-based slice -> planted count

ROLE_CELLS = {"A": (1, 1), "B": (1, 2), "C": (3, 3), "D": (4, 0)}

DATE_START = datetime(2000, 1, 1, 0, 0)
DATE_END = datetime(2004, 12, 31, 23, 59)


def site_name(row: int, col: int) -> str:
    return f"s{row:02d}{col:02d}"


def grid_geometry(rows: int, cols: int, cell_deg: float = 0.005,
                  origin=(0.0, 0.0)) -> SiteGeometrySet:
    """Axis-aligned grid of square sites, row-major ids."""
    lon0, lat0 = origin
    polygons = {}
    for r in range(rows):
        for c in range(cols):
            x0 = lon0 + c * cell_deg
            y0 = lat0 + r * cell_deg
            polygons[site_name(r, c)] = Polygon([
                (x0, y0), (x0 + cell_deg, y0),
                (x0 + cell_deg, y0 + cell_deg), (x0, y0 + cell_deg),
            ])
    return SiteGeometrySet(polygons)


def _clipped_round(values) -> np.ndarray:
    return np.maximum(np.rint(values), 0).astype(np.int64)


def benchmark_counts(seed: int) -> tuple:
    """(counts, site_order, roles): the planted 25 x 60 monthly count matrix.

    Distribution parameters are variances, not standard deviations: the
    high-volume sites draw from N(8, 4), the frequent site from N(1, 4) and
    background from N(0, 0.25), everything rounded and clipped at zero. B
    perturbs A's final values by round(U(-3, 3)).
    """
    rng = np.random.default_rng(seed)
    site_order = tuple(site_name(r, c) for r in range(5) for c in range(5))
    roles = {name: site_name(*cell) for name, cell in ROLE_CELLS.items()}

    a = _clipped_round(rng.normal(8.0, 2.0, CORPUS_MONTHS))
    b = np.maximum(a + np.rint(rng.uniform(-3.0, 3.0, CORPUS_MONTHS)).astype(np.int64), 0)
    c = _clipped_round(rng.normal(1.0, 2.0, CORPUS_MONTHS))
    d = _clipped_round(rng.normal(0.0, 0.5, CORPUS_MONTHS))
    for slice_idx, count in SPIKE_SLICES.items():
        d[slice_idx] = count

    counts = np.zeros((25, CORPUS_MONTHS), dtype=np.int64)
    planted = {roles["A"]: a, roles["B"]: b, roles["C"]: c, roles["D"]: d}
    for i, site in enumerate(site_order):
        counts[i] = planted[site] if site in planted else \
            _clipped_round(rng.normal(0.0, 0.5, CORPUS_MONTHS))
    return counts, site_order, roles


def _records_from_counts(counts, site_order, crime_type: str,
                         start_year: int = 2000) -> list:
    """Deterministic event placement: the i-th event of a (site, month) cell
    lands on day i%28+1 at hour (i*7)%24."""
    records = []
    for i, site in enumerate(site_order):
        for j in range(counts.shape[1]):
            year = start_year + j // 12
            month = j % 12 + 1
            for event in range(int(counts[i, j])):
                ts = datetime(year, month, (event % 28) + 1,
                              (event * 7) % 24, (event * 13) % 60)
                records.append(CrimeRecord(site, crime_type, ts))
    return records


@dataclass(frozen=True)
class SynthRegion:
    geometry: SiteGeometrySet
    catalog: CrimeCatalog
    slicing: TimeSlicing
    roles: dict  # A/B/C/D -> site id
    counts: np.ndarray
    site_order: tuple


def synth_region(seed: int = 0, crime_type: str = "incident") -> SynthRegion:
    """The seeded 5x5 benchmark corpus with its planted ground truth."""
    counts, site_order, roles = benchmark_counts(seed)
    geometry = grid_geometry(5, 5)
    records = _records_from_counts(counts, site_order, crime_type)
    catalog = CrimeCatalog(records, date_range=(DATE_START, DATE_END),
                           dataset_label=f"benchmark-region-{seed}")
    slicing = TimeSlicing.from_range("month", DATE_START, DATE_END)
    return SynthRegion(geometry, catalog, slicing, roles, counts, site_order)


@dataclass(frozen=True)
class SynthCity:
    geometry: SiteGeometrySet
    catalog: CrimeCatalog
    slicing: TimeSlicing
    clustering: RegionClustering
    planted: dict  # cluster index -> tuple of planted site ids

    @property
    def adjacency(self):
        return build_adjacency(self.geometry)


ARCHETYPE_CYCLE = ("quiet", "single", "spiky", "pair")


def synth_city(seed: int = 0, side: int = 20, n_clusters: int = 20,
               background_rate: float = 0.02,
               crime_type: str = "incident") -> SynthCity:
    """Desk-scale city: `side`x`side` sites, k-means clusters, planted archetypes.

    Cluster archetypes cycle quiet / single high-rate site / spiky site /
    correlated pair. Quiet clusters stay exactly empty; archetype clusters
    additionally get a sparse event background.
    """
    geometry = grid_geometry(side, side)
    adjacency = build_adjacency(geometry)
    points = {s: geometry.projection.to_xy(*geometry.centroids[s]) for s in geometry.site_ids}
    clustering = kmeans_regions(points, n_clusters, seed=seed)

    rng = np.random.default_rng(seed)
    counts = {site: np.zeros(CORPUS_MONTHS, dtype=np.int64) for site in geometry.site_ids}
    planted = {}
    for cluster in range(n_clusters):
        sites = clustering.members(cluster)
        kind = ARCHETYPE_CYCLE[cluster % len(ARCHETYPE_CYCLE)]
        if kind == "quiet" or not sites:
            planted[cluster] = ()
            continue
        center = clustering.centroids[cluster]
        anchor = min(sites, key=lambda s: ((points[s][0] - center[0]) ** 2
                                           + (points[s][1] - center[1]) ** 2, s))
        if kind == "single":
            counts[anchor] = _clipped_round(rng.normal(8.0, 2.0, CORPUS_MONTHS))
            planted[cluster] = (anchor,)
        elif kind == "spiky":
            series = np.zeros(CORPUS_MONTHS, dtype=np.int64)
            series[(7 + cluster) % CORPUS_MONTHS] = 15
            series[(29 + 2 * cluster) % CORPUS_MONTHS] = 10
            counts[anchor] = series
            planted[cluster] = (anchor,)
        else:  # pair
            partners = sorted(set(adjacency.of(anchor)) & set(sites))
            base = _clipped_round(rng.normal(8.0, 2.0, CORPUS_MONTHS))
            counts[anchor] = base
            if partners:
                partner = partners[0]
                counts[partner] = np.maximum(
                    base + np.rint(rng.uniform(-3.0, 3.0, CORPUS_MONTHS)).astype(np.int64), 0)
                planted[cluster] = tuple(sorted((anchor, partner)))
            else:
                planted[cluster] = (anchor,)
        if background_rate > 0:
            for site in sites:
                if site in planted[cluster]:
                    continue
                noise = rng.random(CORPUS_MONTHS) < background_rate
                counts[site] += noise.astype(np.int64)

    site_order = geometry.site_ids
    matrix = np.array([counts[s] for s in site_order])
    records = _records_from_counts(matrix, site_order, crime_type)
    catalog = CrimeCatalog(records, date_range=(DATE_START, DATE_END),
                           dataset_label=f"synth-city-{seed}")
    slicing = TimeSlicing.from_range("month", DATE_START, DATE_END)
    return SynthCity(geometry, catalog, slicing, clustering, planted)


def catalog_to_csv_rows(catalog: CrimeCatalog):
    yield ("site_id", "crime_type", "timestamp")
    for record in catalog.records:
        yield (record.site_id, record.crime_type, record.timestamp.strftime("%Y-%m-%dT%H:%M"))

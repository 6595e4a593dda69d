"""Spatio-temporal crime event analytics.

Detects hotspots in user-selected regions via sparse non-negative matrix
factorization, benchmarks them against a Getis-Ord Gi* baseline and serves
linked-view aggregates over HTTP.
"""

from .aggregates import (CumulativeSeries, FilterState, NearRepeatPair,
                         RadialSeries, RankingSeries, build_matrix,
                         cumulative_series, global_series, near_repeat_pairs,
                         radial_series, ranking_series)
from .baseline import (ComparisonReport, GiStarResult, RegionClustering,
                       SsiReport, gi_star, kmeans_regions, run_comparison,
                       ssi_compare, ssi_value)
from .catalog import (CrimeCatalog, CrimeMatrix, CrimeRecord, TimeSlicing,
                      count_matrix_entries, ingest_records, load_type_groups,
                      split_by_category)
from .errors import CrimescopeError
from .geometry import (AdjacencyGraph, Region, SiteGeometrySet,
                       build_adjacency, expand_region, load_geometry,
                       region_from_site_ids, select_by_address,
                       select_by_point, select_by_polygon, select_by_polyline)
from .hotspots import (GaugeStats, HotspotModel, NmfConfig, binarize_h,
                       extract_memberships, factorize, gauge,
                       importance_score, nmf_site_labels, otsu_threshold)
from .synth import synth_city, synth_region

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]

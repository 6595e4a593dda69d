"""Spatial-statistics baseline: Getis-Ord Gi*, k-means regions and SSI agreement.

The Gi* statistic uses binary queen-contiguity weights including the site
itself (the star variant). Hotspot labels are the statistically significant
high tail only: z positive with one-sided p at the configured confidence.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.stats import norm

from .catalog import CrimeCatalog, TimeSlicing, count_matrix_entries
from .errors import ModelError
from .geometry import AdjacencyGraph, SiteGeometrySet
from .hotspots import NmfConfig, factorize, nmf_site_labels


@dataclass(frozen=True)
class GiStarResult:
    sites: tuple
    z_scores: np.ndarray
    p_values: np.ndarray
    labels: np.ndarray  # 1 where a significant high-value cluster

    def as_dict(self):
        return {site: {"z": float(z), "p": float(p), "hotspot": bool(l)}
                for site, z, p, l in zip(self.sites, self.z_scores, self.p_values, self.labels)}


def gi_star(values, adjacency: AdjacencyGraph, sites, confidence: float = 99.0) -> GiStarResult:
    """Standardized Gi* per site with self-included binary weights.

    `values` aligns with `sites`; neighbors outside `sites` are ignored, so a
    cluster can be analyzed as its own little universe. The binary weight
    scheme is whatever neighbor relation `adjacency` encodes (queen
    contiguity by default; pass a distance-band or k-nearest graph for other
    schemes). Constant input has no autocorrelation signal and yields
    all-zero z.
    """
    sites = tuple(sites)
    x = np.asarray(values, dtype=float)
    n = x.size
    if n != len(sites):
        raise ModelError("values and sites length mismatch")
    if n < 3:
        raise ModelError("Gi* needs at least 3 sites")
    if np.any(x < 0):
        raise ModelError("Gi* input counts must be non-negative")

    index = {s: i for i, s in enumerate(sites)}
    mean = x.mean()
    s_dev = _sqrt_nonneg((x ** 2).sum() / n - mean ** 2)

    z = np.zeros(n)
    if s_dev > 0:
        for i, site in enumerate(sites):
            hood = [i] + [index[nb] for nb in adjacency.of(site) if nb in index]
            w = len(hood)
            local_sum = x[hood].sum()
            denom = s_dev * _sqrt_nonneg((n * w - w * w) / (n - 1))
            if denom > 0:
                z[i] = (local_sum - w * mean) / denom
    p = norm.sf(z)  # one-sided upper tail
    alpha = 1.0 - confidence / 100.0
    labels = ((z > 0) & (p <= alpha)).astype(np.int8)
    return GiStarResult(sites, z, p, labels)


def _sqrt_nonneg(value: float) -> float:
    return float(np.sqrt(value)) if value > 0 else 0.0


@dataclass(frozen=True)
class RegionClustering:
    assignment: dict  # site_id -> cluster index
    centroids: np.ndarray  # (k, 2)
    k_clusters: int

    def members(self, cluster: int) -> tuple:
        return tuple(sorted(s for s, c in self.assignment.items() if c == cluster))


def kmeans_regions(points, k_clusters: int = 300, seed: int = 0,
                   max_iters: int = 100, rel_tol: float = 1e-6) -> RegionClustering:
    """Lloyd k-means with k-means++ seeding over site centroid coordinates.

    `points` maps site_id -> (x, y). Deterministic per seed; empty clusters
    are repaired by reassigning the farthest member of the largest cluster.
    """
    site_ids = tuple(sorted(points))
    coords = np.array([points[s] for s in site_ids], dtype=float)
    n = len(site_ids)
    if k_clusters > n:
        raise ModelError(f"k_clusters={k_clusters} exceeds number of sites {n}")
    if k_clusters < 1:
        raise ModelError("k_clusters must be >= 1")
    rng = np.random.default_rng(seed)

    # k-means++ seeding
    centers = np.empty((k_clusters, 2))
    first = int(rng.integers(n))
    centers[0] = coords[first]
    closest_sq = ((coords - centers[0]) ** 2).sum(axis=1)
    for c in range(1, k_clusters):
        total = closest_sq.sum()
        if total <= 0:
            centers[c:] = coords[first]
            break
        probs = closest_sq / total
        pick = int(rng.choice(n, p=probs))
        centers[c] = coords[pick]
        closest_sq = np.minimum(closest_sq, ((coords - centers[c]) ** 2).sum(axis=1))

    assignment = np.zeros(n, dtype=np.int64)
    previous_objective = None
    for _ in range(max_iters):
        dists = ((coords[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        assignment = dists.argmin(axis=1)
        # repair empties before the update step
        for cluster in range(k_clusters):
            if not np.any(assignment == cluster):
                counts = np.bincount(assignment, minlength=k_clusters)
                largest = int(counts.argmax())
                members = np.flatnonzero(assignment == largest)
                center = coords[members].mean(axis=0)
                farthest = members[int(((coords[members] - center) ** 2).sum(axis=1).argmax())]
                assignment[farthest] = cluster
        for cluster in range(k_clusters):
            centers[cluster] = coords[assignment == cluster].mean(axis=0)
        objective = float(((coords - centers[assignment]) ** 2).sum())
        if previous_objective is not None and \
                abs(previous_objective - objective) <= rel_tol * max(previous_objective, 1e-300):
            break
        previous_objective = objective

    return RegionClustering({s: int(c) for s, c in zip(site_ids, assignment)},
                            centers.copy(), k_clusters)


SSI_CATEGORIES = ("P", "F", "G", "N")


@dataclass(frozen=True)
class SsiReport:
    categories: dict  # site_id -> P|F|G|N
    counts: dict  # category -> count
    ssi: float


def ssi_value(p: int, f: int, g: int, n: int) -> float:
    denominator = 2 * p + f + g + 2 * n
    if denominator == 0:
        raise ModelError("SSI undefined: no sites categorized")
    return (2 * p + 2 * n) / denominator


def ssi_compare(nmf_labels: dict, gi_labels: dict) -> SsiReport:
    """Per-site P/F/G/N categories and the Sokal-Sneath agreement index."""
    if set(nmf_labels) != set(gi_labels):
        raise ModelError("label universes differ between detectors")
    if not nmf_labels:
        raise ModelError("empty site universe")
    categories = {}
    for site in nmf_labels:
        by_nmf = bool(nmf_labels[site])
        by_gi = bool(gi_labels[site])
        if by_nmf and by_gi:
            categories[site] = "P"
        elif by_nmf:
            categories[site] = "F"
        elif by_gi:
            categories[site] = "G"
        else:
            categories[site] = "N"
    counts = {c: sum(1 for v in categories.values() if v == c) for c in SSI_CATEGORIES}
    return SsiReport(categories, counts,
                     ssi_value(counts["P"], counts["F"], counts["G"], counts["N"]))


@dataclass(frozen=True)
class ClusterComparison:
    cluster: int
    sites: tuple
    ssi: float
    counts: dict
    nmf_labels: dict
    gi_labels: dict
    z_scores: dict


@dataclass(frozen=True)
class ComparisonReport:
    clusters: tuple  # ClusterComparison, ordered by cluster index
    skipped: tuple  # (cluster index, reason)
    confidence: float
    k: int

    @property
    def ssi_values(self):
        return [c.ssi for c in self.clusters]

    def histogram(self, lo: float = 0.9, hi: float = 1.0, width: float = 0.01):
        """(edges, counts) with one underflow bucket below `lo`."""
        edges = [lo + i * width for i in range(int(round((hi - lo) / width)) + 1)]
        counts = [0] * (len(edges) + 0)
        under = 0
        for value in self.ssi_values:
            if value < lo:
                under += 1
                continue
            slot = min(int((value - lo) / width), len(edges) - 2)
            counts[slot] += 1
        return edges, counts[:-1], under

    def histogram_text(self) -> str:
        edges, counts, under = self.histogram()
        lines = ["SSI distribution over clusters"]
        if under:
            lines.append(f"  < {edges[0]:.2f}: {'#' * under} ({under})")
        for i, count in enumerate(counts):
            label = f"[{edges[i]:.2f}, {edges[i + 1]:.2f})"
            lines.append(f"  {label}: {'#' * count} ({count})")
        lines.append(f"  mean SSI: {np.mean(self.ssi_values):.4f}  "
                     f"min SSI: {min(self.ssi_values):.4f}")
        return "\n".join(lines)

    def as_dict(self):
        return {
            "confidence": self.confidence,
            "k": self.k,
            "clusters": [
                {"cluster": c.cluster, "sites": list(c.sites), "ssi": c.ssi,
                 "counts": c.counts,
                 "nmf_labels": {s: bool(v) for s, v in c.nmf_labels.items()},
                 "gi_labels": {s: bool(v) for s, v in c.gi_labels.items()},
                 "z_scores": {s: float(v) for s, v in c.z_scores.items()}}
                for c in self.clusters
            ],
            "skipped": [{"cluster": idx, "reason": reason} for idx, reason in self.skipped],
            "mean_ssi": float(np.mean(self.ssi_values)) if self.clusters else None,
            "min_ssi": float(min(self.ssi_values)) if self.clusters else None,
        }


def run_comparison(catalog: CrimeCatalog, geometry: SiteGeometrySet,
                   adjacency: AdjacencyGraph, clustering: RegionClustering,
                   nmf_cfg: NmfConfig = NmfConfig(), confidence: float = 99.0,
                   slicing: TimeSlicing | None = None) -> ComparisonReport:
    """Per-cluster NMF-vs-Gi* agreement over a clustered city.

    Each cluster is analyzed independently: NMF labels come from the support
    of the non-noise components of the cluster's site x slice matrix, Gi*
    labels from the per-site totals with adjacency restricted to the cluster.
    Clusters with fewer than 3 sites are skipped with a notice.
    """
    if slicing is None:
        slicing = catalog.default_slicing("month")
    clusters = []
    skipped = []
    for cluster in range(clustering.k_clusters):
        sites = clustering.members(cluster)
        if len(sites) < 3:
            skipped.append((cluster, f"only {len(sites)} sites"))
            continue
        matrix = count_matrix_entries(catalog, slicing, sites)
        cfg = replace(nmf_cfg, seed=nmf_cfg.seed + cluster)
        model = factorize(matrix, cfg)
        nmf_labels = nmf_site_labels(model)

        totals = matrix.X.sum(axis=1)
        gi = gi_star(totals, adjacency, sites, confidence)
        gi_labels = {s: bool(l) for s, l in zip(sites, gi.labels)}

        report = ssi_compare(nmf_labels, gi_labels)
        clusters.append(ClusterComparison(cluster, sites, report.ssi, report.counts,
                                          nmf_labels, gi_labels,
                                          dict(zip(sites, gi.z_scores))))
    if not clusters:
        raise ModelError("no cluster had enough sites to compare")
    return ComparisonReport(tuple(clusters), tuple(skipped), confidence, nmf_cfg.k)

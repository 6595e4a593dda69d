"""Gi*, k-means regions, SSI and the synthetic generators."""

import itertools
import math

import numpy as np
import pytest
from scipy.stats import norm

from crimescope.baseline import (gi_star, kmeans_regions, run_comparison,
                                 ssi_compare, ssi_value)
from crimescope.errors import ModelError
from crimescope.geometry import build_adjacency
from crimescope.hotspots import NmfConfig
from crimescope.synth import benchmark_counts, grid_geometry, synth_city, synth_region


# ---------------------------------------------------------------- oracles

def gi_star_oracle(values, neighbors, sites):
    """Direct per-site evaluation of the standardized Gi* formula."""
    n = len(sites)
    xs = {s: float(v) for s, v in zip(sites, values)}
    mean = sum(xs.values()) / n
    s_dev = math.sqrt(max(sum(v * v for v in xs.values()) / n - mean * mean, 0.0))
    out = {}
    for site in sites:
        hood = {site} | (set(neighbors.get(site, ())) & set(sites))
        w = len(hood)
        local = sum(xs[s] for s in hood)
        denom = s_dev * math.sqrt((n * w - w * w) / (n - 1)) if s_dev > 0 else 0.0
        out[site] = 0.0 if denom == 0 else (local - w * mean) / denom
    return out


def kmeans_sse(coords, assignment, k):
    total = 0.0
    for cluster in range(k):
        members = coords[assignment == cluster]
        if len(members):
            center = members.mean(axis=0)
            total += float(((members - center) ** 2).sum())
    return total


# -------------------------------------------------------------------- Gi*

def test_gi_star_constant_values_zero(grid5):
    adjacency = build_adjacency(grid5)
    result = gi_star(np.full(25, 7.0), adjacency, grid5.site_ids)
    assert np.allclose(result.z_scores, 0.0)
    assert result.labels.sum() == 0


def test_gi_star_single_high_cell_is_maximum(grid5):
    adjacency = build_adjacency(grid5)
    values = np.zeros(25)
    hot = grid5.site_ids.index("s0202")
    values[hot] = 100.0
    result = gi_star(values, adjacency, grid5.site_ids)
    assert result.z_scores[hot] == result.z_scores.max()
    oracle = gi_star_oracle(values, {s: adjacency.of(s) for s in grid5.site_ids},
                            grid5.site_ids)
    for i, site in enumerate(grid5.site_ids):
        assert abs(result.z_scores[i] - oracle[site]) <= 1e-9


def test_gi_star_random_fixtures_match_oracle(grid5):
    adjacency = build_adjacency(grid5)
    neighbors = {s: adjacency.of(s) for s in grid5.site_ids}
    rng = np.random.default_rng(66)
    for _ in range(10):
        values = rng.integers(0, 40, 25).astype(float)
        result = gi_star(values, adjacency, grid5.site_ids)
        oracle = gi_star_oracle(values, neighbors, grid5.site_ids)
        for i, site in enumerate(grid5.site_ids):
            assert abs(result.z_scores[i] - oracle[site]) <= 1e-9


def test_gi_star_labels_at_99_are_z_above_2_326(grid5):
    adjacency = build_adjacency(grid5)
    rng = np.random.default_rng(3)
    values = rng.integers(0, 30, 25).astype(float)
    values[:6] += 80  # force some significant structure
    result = gi_star(values, adjacency, grid5.site_ids, confidence=99.0)
    critical = norm.ppf(0.99)  # one-sided 2.326...
    assert np.array_equal(result.labels == 1, result.z_scores >= critical)
    assert np.allclose(result.p_values, norm.sf(result.z_scores))


def test_gi_star_translation_invariance(grid5):
    adjacency = build_adjacency(grid5)
    rng = np.random.default_rng(10)
    values = rng.integers(0, 25, 25).astype(float)
    base = gi_star(values, adjacency, grid5.site_ids)
    shifted = gi_star(values + 50.0, adjacency, grid5.site_ids)
    assert np.allclose(base.z_scores, shifted.z_scores, atol=1e-9)


def test_gi_star_permutation_sanity():
    geom = grid_geometry(4, 4)
    adjacency = build_adjacency(geom)
    rng = np.random.default_rng(9)
    values = rng.integers(0, 20, 16).astype(float)
    base = gi_star(values, adjacency, geom.site_ids)
    # permuting site ids together with their values and the graph relabels z
    perm = list(rng.permutation(16))
    relabel = {geom.site_ids[i]: geom.site_ids[perm[i]] for i in range(16)}
    remapped_neighbors = {relabel[s]: frozenset(relabel[t] for t in adjacency.of(s))
                          for s in geom.site_ids}

    class FakeAdjacency:
        def of(self, site):
            return remapped_neighbors.get(site, frozenset())

    new_order = [relabel[s] for s in geom.site_ids]
    permuted = gi_star(values, FakeAdjacency(), new_order)
    assert np.allclose(base.z_scores, permuted.z_scores)


def test_gi_star_preconditions(grid5):
    adjacency = build_adjacency(grid5)
    with pytest.raises(ModelError):
        gi_star([1.0, 2.0], adjacency, grid5.site_ids[:2])
    with pytest.raises(ModelError):
        gi_star([-1.0] * 25, adjacency, grid5.site_ids)


# ----------------------------------------------------------------- kmeans

def test_kmeans_single_cluster():
    points = {f"p{i}": (float(i), 0.0) for i in range(6)}
    clustering = kmeans_regions(points, 1, seed=0)
    assert set(clustering.assignment.values()) == {0}
    assert clustering.members(0) == tuple(sorted(points))


def test_kmeans_two_blobs_match_exhaustive_oracle():
    rng = np.random.default_rng(12)
    blob_a = rng.normal((0, 0), 0.5, (6, 2))
    blob_b = rng.normal((10, 10), 0.5, (6, 2))
    coords = np.vstack([blob_a, blob_b])
    points = {f"p{i:02d}": tuple(coords[i]) for i in range(12)}
    clustering = kmeans_regions(points, 2, seed=3)

    site_ids = sorted(points)
    ordered = np.array([points[s] for s in site_ids])
    best_sse, best_split = None, None
    for bits in itertools.product([0, 1], repeat=11):  # fix point 0 in cluster 0
        assignment = np.array((0,) + bits)
        if assignment.sum() in (0, 12):
            continue
        sse = kmeans_sse(ordered, assignment, 2)
        if best_sse is None or sse < best_sse:
            best_sse, best_split = sse, assignment
    ours = np.array([clustering.assignment[s] for s in site_ids])
    same = np.array_equal(ours, best_split) or np.array_equal(1 - ours, best_split)
    assert same
    assert abs(kmeans_sse(ordered, ours, 2) - best_sse) < 1e-9


def test_kmeans_deterministic_and_validates():
    rng = np.random.default_rng(1)
    points = {f"p{i}": tuple(rng.random(2)) for i in range(30)}
    c1 = kmeans_regions(points, 5, seed=42)
    c2 = kmeans_regions(points, 5, seed=42)
    assert c1.assignment == c2.assignment
    assert np.array_equal(c1.centroids, c2.centroids)
    with pytest.raises(ModelError):
        kmeans_regions(points, 31, seed=0)
    assert all(len(c1.members(c)) > 0 for c in range(5))


def test_kmeans_mean_cluster_size_city_scale():
    geom = grid_geometry(20, 20)
    points = {s: geom.projection.to_xy(*geom.centroids[s]) for s in geom.site_ids}
    clustering = kmeans_regions(points, 20, seed=0)
    sizes = [len(clustering.members(c)) for c in range(20)]
    assert sum(sizes) == 400
    assert abs(np.mean(sizes) - 20) < 1e-9  # fixed-ratio analogue of ~100-unit groups


# -------------------------------------------------------------------- SSI

def test_ssi_perfect_match():
    labels = {f"s{i}": i < 10 for i in range(100)}
    report = ssi_compare(labels, dict(labels))
    assert report.ssi == 1.0
    assert report.counts == {"P": 10, "F": 0, "G": 0, "N": 90}


def test_ssi_fig7a_shape():
    # P=2, N=20, F=2, G=0 -> 44/46
    nmf = {}
    gi = {}
    for i in range(24):
        site = f"s{i}"
        nmf[site] = i < 4          # 4 NMF hotspots
        gi[site] = i < 2           # of which Gi* sees 2
    report = ssi_compare(nmf, gi)
    assert report.counts == {"P": 2, "F": 2, "G": 0, "N": 20}
    assert abs(report.ssi - 44 / 46) < 1e-12


def test_ssi_total_disagreement_zero():
    nmf = {"a": True, "b": True, "c": True, "d": False, "e": False, "f": False}
    gi = {"a": False, "b": False, "c": False, "d": True, "e": True, "f": True}
    assert ssi_compare(nmf, gi).ssi == 0.0


def test_ssi_bounds_random():
    rng = np.random.default_rng(14)
    for _ in range(200):
        n = int(rng.integers(1, 40))
        nmf = {f"s{i}": bool(rng.integers(2)) for i in range(n)}
        gi = {f"s{i}": bool(rng.integers(2)) for i in range(n)}
        assert 0.0 <= ssi_compare(nmf, gi).ssi <= 1.0


def test_ssi_strictly_decreases_on_n_to_f_flip():
    rng = np.random.default_rng(15)
    for _ in range(50):
        p, f, g, n = (int(v) for v in rng.integers(0, 12, 4))
        n += 1  # need an N to flip
        before = ssi_value(p, f, g, n)
        after = ssi_value(p, f + 1, g, n - 1)
        assert after < before


def test_ssi_mismatched_universe_error():
    with pytest.raises(ModelError):
        ssi_compare({"a": True}, {"b": True})
    with pytest.raises(ModelError):
        ssi_compare({}, {})


# ------------------------------------------------------------- generators

def test_synth_region_planted_spikes():
    counts, site_order, roles = benchmark_counts(seed=3)
    d_row = counts[site_order.index(roles["D"])]
    assert d_row[35] == 15 and d_row[47] == 10


def test_synth_region_b_tracks_a():
    for seed in range(5):
        counts, site_order, roles = benchmark_counts(seed)
        a = counts[site_order.index(roles["A"])]
        b = counts[site_order.index(roles["B"])]
        assert np.all(b - a >= -3) and np.all(b - a <= 3)


def test_synth_region_background_mostly_zero_monte_carlo():
    # analytic check: a background cell is zero iff its N(0, 0.5^2) draw is
    # below +0.5 (negatives clip to zero), i.e. with probability Phi(1)=0.8413
    zero_fractions = []
    for seed in range(100):
        counts, site_order, roles = benchmark_counts(seed)
        special = set(roles.values())
        background = np.array([counts[i] for i, s in enumerate(site_order)
                               if s not in special])
        zero_fractions.append((background == 0).mean())
    expected = norm.cdf(1.0)
    assert abs(np.mean(zero_fractions) - expected) < 0.01
    assert min(zero_fractions) >= expected - 0.05


def test_synth_region_deterministic_and_integer():
    first = synth_region(seed=9)
    second = synth_region(seed=9)
    assert first.catalog == second.catalog
    assert first.counts.dtype == np.int64 and (first.counts >= 0).all()
    other = synth_region(seed=10)
    assert other.catalog != first.catalog


def test_synth_city_shape_and_determinism():
    city = synth_city(seed=2)
    assert len(city.geometry) == 400
    assert city.clustering.k_clusters == 20
    again = synth_city(seed=2)
    assert city.catalog == again.catalog
    assert city.clustering.assignment == again.clustering.assignment
    # quiet clusters stay exactly empty
    site_totals = {s: 0 for s in city.geometry.site_ids}
    for r in city.catalog.records:
        site_totals[r.site_id] += 1
    for cluster, planted in city.planted.items():
        if cluster % 4 == 0:
            assert planted == ()
            assert all(site_totals[s] == 0 for s in city.clustering.members(cluster))


# --------------------------------------------------------- run_comparison

def test_run_comparison_skips_tiny_clusters(benchmark_region, benchmark_adjacency):
    from crimescope.baseline import RegionClustering

    sites = benchmark_region.site_order
    assignment = {s: (0 if i < 2 else 1) for i, s in enumerate(sites)}  # cluster 0 has 2 sites
    clustering = RegionClustering(assignment, np.zeros((2, 2)), 2)
    report = run_comparison(benchmark_region.catalog, benchmark_region.geometry, benchmark_adjacency, clustering,
                            NmfConfig(k=3, restarts=3, seed=0))
    assert report.skipped == ((0, "only 2 sites"),)
    assert len(report.clusters) == 1


def test_run_comparison_histogram_render(benchmark_region, benchmark_adjacency):
    from crimescope.baseline import RegionClustering

    assignment = {s: 0 for s in benchmark_region.site_order}
    clustering = RegionClustering(assignment, np.zeros((1, 2)), 1)
    report = run_comparison(benchmark_region.catalog, benchmark_region.geometry, benchmark_adjacency, clustering,
                            NmfConfig(k=3, restarts=5, seed=0))
    text = report.histogram_text()
    assert "SSI distribution" in text and "mean SSI" in text
    payload = report.as_dict()
    assert payload["clusters"][0]["ssi"] == report.clusters[0].ssi

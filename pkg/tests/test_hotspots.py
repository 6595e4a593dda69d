"""Sparse NMF, Otsu binarization and gauge scoring against independent oracles."""

import numpy as np
import pytest

from crimescope.catalog import count_matrix_entries
from crimescope.errors import ModelError
from crimescope.hotspots import (NmfConfig, binarize_h, binarize_rows,
                                 extract_memberships, factorize, gauge,
                                 importance_score, nmf_site_labels, nnls_multiple,
                                 otsu_threshold, reconstruction_error, OTSU_BINS)


# ---------------------------------------------------------------- oracles

def brute_otsu(values, bins=OTSU_BINS):
    """Exhaustive between-class-variance maximization with plain loops."""
    values = [float(v) for v in values]
    vmin, vmax = min(values), max(values)
    if vmax <= vmin:
        return None
    width = (vmax - vmin) / bins
    counts = [0] * bins
    for v in values:
        idx = int((v - vmin) / (vmax - vmin) * bins)
        counts[min(idx, bins - 1)] += 1
    centers = [vmin + (i + 0.5) * width for i in range(bins)]

    best_t, best_var = 0, -1.0
    for t in range(bins - 1):
        w0 = sum(counts[:t + 1])
        w1 = len(values) - w0
        if w0 == 0 or w1 == 0:
            var = 0.0
        else:
            mu0 = sum(counts[i] * centers[i] for i in range(t + 1)) / w0
            mu1 = sum(counts[i] * centers[i] for i in range(t + 1, bins)) / w1
            var = w0 * w1 * (mu0 - mu1) ** 2
        if var > best_var:
            best_var, best_t = var, t
    return vmin + (best_t + 1) * width


def brute_nnls(A, b):
    """Exhaustive-support NNLS for tiny systems, via plain least squares."""
    import itertools

    k = A.shape[1]
    best, best_err = np.zeros(k), float(((b) ** 2).sum())
    for size in range(1, k + 1):
        for support in itertools.combinations(range(k), size):
            sub = A[:, support]
            x, *_ = np.linalg.lstsq(sub, b, rcond=None)
            if (x < -1e-12).any():
                continue
            full = np.zeros(k)
            full[list(support)] = np.maximum(x, 0)
            err = float(((A @ full - b) ** 2).sum())
            if err < best_err - 1e-12:
                best, best_err = full, err
    return best


# ------------------------------------------------------------------- otsu

def test_otsu_bimodal_row():
    row = np.array([0, 0, 0, 10, 10.0])
    threshold = otsu_threshold(row)
    assert (row > threshold).tolist() == [False, False, False, True, True]
    assert binarize_h(row[None, :]).tolist() == [[0, 0, 0, 1, 1]]


def test_otsu_constant_row_all_zero():
    assert otsu_threshold(np.array([2.0, 2.0, 2.0])) is None
    assert binarize_h(np.array([[2.0, 2.0, 2.0]])).tolist() == [[0, 0, 0]]


def test_otsu_mixed_row_vs_brute_oracle():
    row = np.array([1, 2, 3, 8, 9.0])
    threshold = otsu_threshold(row)
    assert threshold == brute_otsu(row)
    assert (row > threshold).tolist() == [False, False, False, True, True]


def test_otsu_random_vectors_match_oracle():
    rng = np.random.default_rng(123)
    for i in range(100):
        size = int(rng.integers(3, 80))
        if i % 3 == 0:
            values = rng.integers(0, 20, size).astype(float)
        else:
            values = np.abs(rng.normal(0, rng.uniform(0.1, 10), size))
        assert otsu_threshold(values) == brute_otsu(values), f"case {i}"


def test_binarize_near_zero_guard():
    M = np.array([[5.0, 0.1, 0.0], [1e-9, 2e-9, 0.0]])
    out = binarize_rows(M)
    assert out[1].sum() == 0  # near-null row vs the matrix peak
    assert out[0].sum() >= 1


def test_binarize_rejects_negative():
    with pytest.raises(ModelError):
        binarize_h(np.array([[-1.0, 2.0]]))


# ------------------------------------------------------------ memberships

def test_extract_memberships_known_column():
    W = np.array([[0.01, 0.9], [0.02, 0.0], [0.9, 0.0], [0.85, 0.0], [0.03, 0.0]])
    members = extract_memberships(W, ["s1", "s2", "s3", "s4", "s5"])
    assert set(members[0]) == {"s3", "s4"}
    assert set(members[1]) == {"s1"}


def test_extract_memberships_zero_column_empty():
    W = np.array([[1.0, 0.0], [0.5, 0.0]])
    members = extract_memberships(W)
    assert members[1] == ()


# ------------------------------------------------------------------ gauge

def test_importance_corners_exact():
    assert importance_score(0, 0) == 0.0
    assert importance_score(1, 0) == 0.7
    assert importance_score(0, 1) == 0.5
    assert importance_score(1, 1) == 1.0


def test_importance_center_value():
    assert abs(importance_score(0.5, 0.5) - 0.55) < 1e-15


def test_importance_matches_bilinear_everywhere():
    def bilinear(r, q):
        return ((1 - r) * (1 - q) * 0.0 + r * (1 - q) * 0.7
                + (1 - r) * q * 0.5 + r * q * 1.0)

    rng = np.random.default_rng(99)
    for _ in range(1000):
        r, q = rng.random(), rng.random()
        assert abs(importance_score(r, q) - bilinear(r, q)) < 1e-12


def test_gauge_on_benchmark_region_model(benchmark_region):
    X = count_matrix_entries(benchmark_region.catalog, benchmark_region.slicing, benchmark_region.site_order)
    model = factorize(X, NmfConfig(k=3, restarts=10, seed=1234))
    for i, members in enumerate(model.memberships):
        stats = gauge(model, i)
        rows = [benchmark_region.site_order.index(s) for s in members]
        assert stats.crime_count == int(X.X[rows].sum())
        assert stats.rate_of_crimes == stats.crime_count / X.X.sum()
        assert stats.frequency == model.H_bin[i].sum() / 60
        assert 0 <= stats.importance <= 1


def test_gauge_empty_membership_and_degenerate():
    model = factorize(np.zeros((3, 4)), NmfConfig(k=2, restarts=1, seed=0))
    stats = gauge(model, 0)
    assert stats.degenerate and stats.crime_count == 0 and stats.importance == 0.0


# ------------------------------------------------------------------- nnls

def test_nnls_matches_brute_force():
    rng = np.random.default_rng(17)
    for _ in range(60):
        m, k = int(rng.integers(3, 10)), int(rng.integers(1, 5))
        A = rng.random((m, k)) * rng.uniform(0.5, 5)
        B = rng.random((m, 4)) * rng.uniform(0.5, 5) - 0.3
        G = nnls_multiple(A, B)
        assert (G >= 0).all()
        for j in range(B.shape[1]):
            expected = brute_nnls(A, B[:, j])
            ours = float(((A @ G[:, j] - B[:, j]) ** 2).sum())
            best = float(((A @ expected - B[:, j]) ** 2).sum())
            assert ours <= best + 1e-9


# -------------------------------------------------------------- factorize

def test_rank1_outer_product_recovered_exactly():
    rng = np.random.default_rng(4)
    X = np.outer(rng.random(6) + 0.1, rng.random(9) + 0.1)
    model = factorize(X, NmfConfig(k=1, restarts=3, seed=0, sparsity_w=0.0, sparsity_h=0.0))
    assert model.objective / (X ** 2).sum() <= 1e-6


def test_monotone_descent_every_restart():
    rng = np.random.default_rng(21)
    X = rng.random((8, 10)) * 12
    model = factorize(X, NmfConfig(k=3, restarts=10, seed=5))
    for history in model.restart_histories:
        for previous, current in zip(history, history[1:]):
            assert current <= previous * (1 + 1e-12) + 1e-12
        assert history[-1] <= history[0]
    assert model.objective == min(model.restart_objectives)
    assert model.restart_objectives[model.best_restart] == model.objective


def test_objective_recomputes_from_stored_factors():
    rng = np.random.default_rng(2)
    X = rng.random((6, 8)) * 5
    model = factorize(X, NmfConfig(k=2, restarts=4, seed=9))
    recomputed = reconstruction_error(X, model.W, model.H)
    assert abs(model.objective - recomputed) <= 1e-9 * max(model.objective, 1e-300)


def test_seed_determinism_bitwise():
    rng = np.random.default_rng(31)
    X = rng.random((7, 9)) * 8
    cfg = NmfConfig(k=3, restarts=5, seed=1000)
    m1, m2 = factorize(X, cfg), factorize(X, cfg)
    assert m1.W.tobytes() == m2.W.tobytes()
    assert m1.H.tobytes() == m2.H.tobytes()
    different = factorize(X, NmfConfig(k=3, restarts=5, seed=1001))
    assert m1.W.tobytes() != different.W.tobytes()


def test_nonnegativity_and_shapes():
    rng = np.random.default_rng(8)
    X = rng.integers(0, 15, (10, 14)).astype(float)
    model = factorize(X, NmfConfig(k=4, restarts=3, seed=0))
    assert (model.W >= 0).all() and (model.H >= 0).all()
    assert model.W.shape == (10, 4) and model.H.shape == (4, 14)
    assert set(np.unique(model.H_bin)) <= {0, 1}


def test_scaling_covariance():
    rng = np.random.default_rng(55)
    X = rng.integers(0, 12, (9, 12)).astype(float)
    cfg = NmfConfig(k=3, restarts=5, seed=7)
    base = factorize(X, cfg)
    scaled = factorize(3.0 * X, cfg)
    assert set(map(frozenset, base.memberships)) == set(map(frozenset, scaled.memberships))
    assert np.array_equal(base.H_bin, scaled.H_bin)


def test_zero_matrix_degenerate_flag():
    model = factorize(np.zeros((4, 6)), NmfConfig(k=2, restarts=3, seed=0))
    assert model.degenerate
    assert all(model.noise_flags)
    assert model.W.sum() == 0 and model.H.sum() == 0


def test_rank_too_large_rejected():
    with pytest.raises(ModelError) as err:
        factorize(np.ones((3, 5)), NmfConfig(k=4, restarts=1, seed=0))
    assert err.value.code == "rank_too_large"


def test_negative_input_rejected():
    with pytest.raises(ModelError):
        factorize(np.array([[1.0, -0.1], [0.2, 0.3]]), NmfConfig(k=1, restarts=1, seed=0))


def test_config_validation():
    with pytest.raises(ModelError):
        NmfConfig(k=0)
    with pytest.raises(ModelError):
        NmfConfig(restarts=0)
    with pytest.raises(ModelError):
        NmfConfig(sparsity_w=-1)


# --------------------------------------------------- benchmark region runs

def test_benchmark_rank3_structure(benchmark_region):
    X = count_matrix_entries(benchmark_region.catalog, benchmark_region.slicing, benchmark_region.site_order)
    model = factorize(X, NmfConfig(k=3, restarts=10, seed=1234))
    roles = benchmark_region.roles
    want = {frozenset({roles["A"], roles["B"]}), frozenset({roles["C"]}),
            frozenset({roles["D"]})}
    assert {frozenset(m) for m in model.memberships} == want
    d_index = next(i for i, m in enumerate(model.memberships)
                   if set(m) == {roles["D"]})
    active = set(np.flatnonzero(model.H_bin[d_index]).tolist())
    assert {35, 47} <= active
    d_row = X.X[benchmark_region.site_order.index(roles["D"])]
    assert all(d_row[j] > 0 for j in active - {35, 47})


def test_benchmark_rank5_split_and_noise(benchmark_region):
    X = count_matrix_entries(benchmark_region.catalog, benchmark_region.slicing, benchmark_region.site_order)
    model = factorize(X, NmfConfig(k=5, restarts=10, seed=1234))
    roles = benchmark_region.roles
    pair = {roles["A"], roles["B"]}
    keeps_pair = any(pair <= set(m) for m in model.memberships)
    halves = [i for i, m in enumerate(model.memberships) if set(m) and set(m) < pair]
    split_dense = len(halves) == 2 and all(model.H_bin[i].sum() >= 20 for i in halves)
    assert keeps_pair or split_dense
    assert any(model.noise_flags)


def test_nmf_site_labels(benchmark_region):
    X = count_matrix_entries(benchmark_region.catalog, benchmark_region.slicing, benchmark_region.site_order)
    model = factorize(X, NmfConfig(k=3, restarts=10, seed=1234))
    labels = nmf_site_labels(model)
    hot = {s for s, flag in labels.items() if flag}
    assert hot == set(benchmark_region.roles.values())
    zero = factorize(np.zeros((3, 5)), NmfConfig(k=2, restarts=1, seed=0))
    assert not any(nmf_site_labels(zero).values())

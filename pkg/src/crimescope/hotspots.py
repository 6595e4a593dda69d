"""Hotspot detection by sparse non-negative matrix factorization.

The site x time-slice count matrix X is factorized as X ~ W @ H with both
factors non-negative: columns of W are spatial hotspot footprints, rows of H
their per-slice intensities. Sparsity is enforced on both factors at once by
alternating exact non-negativity-constrained least squares on the penalized
objective

    ||X - WH||_F^2 + sw * sum_i ||W[i, :]||_1^2 + sh * sum_j ||H[:, j]||_1^2

(squared L1 of each W row and each H column), which each half-step minimizes
exactly, so the objective never increases. The W term is what keeps a site
from smearing across several components. The factorization is restarted from
several seeded initializations and the solution with the smallest
reconstruction error wins.

Binarization of H rows (and of W columns, for site memberships) uses Otsu's
threshold on a 256-bin histogram of the vector, so no user-facing threshold
knob exists. A vector that is near-null relative to its whole matrix
binarizes to all zeros; components with an all-zero binarized row or an
empty membership are flagged as noise.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg
import scipy.optimize

from .catalog import CrimeMatrix
from .errors import ModelError

OTSU_BINS = 256

# Vectors whose peak is below this fraction of their matrix's peak binarize
# to all zeros (relative, so rescaling the data cannot change the outcome).
NEAR_ZERO_REL = 1e-6

# Supports are enumerated exhaustively for the NNLS subproblems; beyond this
# rank the per-column fallback takes over.
MAX_ENUMERATED_RANK = 12

# A component whose peak cell contribution max(w_i) * max(h_i) is below this
# fraction of the strongest component's peak is a noise component (the
# "almost zero row of H" once the scale split between W and H is normalized
# away).
NOISE_PEAK_REL = 0.10


SPARSITY_H_SCALE = 0.05  # default sparsity_h = this * max(X)^2


@dataclass(frozen=True)
class NmfConfig:
    k: int = 3
    sparsity_w: float = 0.05
    sparsity_h: float | None = None  # None -> SPARSITY_H_SCALE * max(X)^2 at fit time
    max_iters: int = 500
    rel_tol: float = 1e-4
    restarts: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ModelError("rank k must be >= 1")
        if self.restarts < 1:
            raise ModelError("restarts must be >= 1")
        if self.max_iters < 1:
            raise ModelError("max_iters must be >= 1")
        if self.sparsity_w < 0 or (self.sparsity_h is not None and self.sparsity_h < 0):
            raise ModelError("sparsity weights must be non-negative")


@dataclass(frozen=True)
class GaugeStats:
    """The three quantities behind a hotspot's gauge widget."""

    crime_count: int
    rate_of_crimes: float
    frequency: float
    importance: float
    degenerate: bool = False


@dataclass
class HotspotModel:
    W: np.ndarray  # (m, k)
    H: np.ndarray  # (k, n)
    H_bin: np.ndarray  # (k, n) in {0, 1}
    memberships: tuple  # per hotspot: tuple of member site ids
    noise_flags: tuple  # per hotspot: True if the component is noise
    objective: float  # final ||X - WH||_F^2 of the winning restart
    restart_objectives: tuple
    restart_histories: tuple  # penalized objective per iteration, per restart
    best_restart: int
    row_sites: tuple
    config: NmfConfig
    X: np.ndarray = field(repr=False, default=None)
    degenerate: bool = False

    @property
    def k(self):
        return self.W.shape[1]


def importance_score(rate: float, frequency: float) -> float:
    """Bilinear relevance over the unit square: corners 0, 0.7, 0.5 and 1."""
    return 0.7 * rate + 0.5 * frequency - 0.2 * rate * frequency


def otsu_threshold(values, bins: int = OTSU_BINS):
    """Between-class-variance-maximizing cut over a uniform histogram.

    Returns the threshold value (upper edge of the winning bin), or None for
    a constant vector, which has nothing to separate.
    """
    v = np.asarray(values, dtype=float).ravel()
    vmin = float(v.min())
    vmax = float(v.max())
    if vmax <= vmin:
        return None
    width = (vmax - vmin) / bins
    idx = np.minimum(((v - vmin) / (vmax - vmin) * bins).astype(np.int64), bins - 1)
    counts = np.bincount(idx, minlength=bins)
    centers = vmin + (np.arange(bins) + 0.5) * width

    w0 = np.cumsum(counts)[:-1]
    w1 = v.size - w0
    s0 = np.cumsum(counts * centers)[:-1]
    s1 = float((counts * centers).sum()) - s0
    valid = (w0 > 0) & (w1 > 0)
    variance = np.zeros(bins - 1)
    variance[valid] = (w0[valid] * w1[valid]
                       * (s0[valid] / w0[valid] - s1[valid] / w1[valid]) ** 2)
    best = int(np.argmax(variance))
    return vmin + (best + 1) * width


def binarize_rows(M: np.ndarray, near_zero_rel: float = NEAR_ZERO_REL) -> np.ndarray:
    """Per-row Otsu binarization with a relative near-null guard."""
    M = np.asarray(M, dtype=float)
    out = np.zeros(M.shape, dtype=np.int8)
    if M.size == 0:
        return out
    floor = near_zero_rel * float(M.max())
    for i, row in enumerate(M):
        if float(row.max()) <= floor:
            continue
        threshold = otsu_threshold(row)
        if threshold is None:
            continue
        out[i] = row > threshold
    return out


def binarize_h(H: np.ndarray, near_zero_rel: float = NEAR_ZERO_REL) -> np.ndarray:
    """A hotspot occurs in a slice iff its binarized H entry is 1."""
    if np.any(np.asarray(H) < 0):
        raise ModelError("H must be non-negative")
    return binarize_rows(H, near_zero_rel)


def extract_memberships(W: np.ndarray, row_sites=None,
                        near_zero_rel: float = NEAR_ZERO_REL) -> tuple:
    """Member sites per hotspot: entries above the column's Otsu threshold."""
    W = np.asarray(W, dtype=float)
    if np.any(W < 0):
        raise ModelError("W must be non-negative")
    if row_sites is None:
        row_sites = tuple(range(W.shape[0]))
    col_bin = binarize_rows(W.T, near_zero_rel)
    return tuple(tuple(row_sites[i] for i in np.flatnonzero(col_bin[c]))
                 for c in range(W.shape[1]))


@functools.lru_cache(maxsize=None)
def _support_order(k):
    supports = []
    for size in range(k, -1, -1):
        for free in itertools.combinations(range(k), size):
            rest = tuple(i for i in range(k) if i not in free)
            supports.append((np.array(free, dtype=np.intp), np.array(rest, dtype=np.intp)))
    return tuple(supports)


def _solve_psd(sub: np.ndarray, rhs: np.ndarray):
    """Solve a tiny symmetric positive-definite system; None if not PD.

    Sizes 1-3 use closed forms (this is the solver's hot path); larger
    systems go through a Cholesky factorization.
    """
    s = sub.shape[0]
    if s == 1:
        a = sub[0, 0]
        if a <= 0:
            return None
        return rhs / a
    if s == 2:
        a, b, c = sub[0, 0], sub[0, 1], sub[1, 1]
        det = a * c - b * b
        if a <= 0 or det <= 0:
            return None
        out = np.empty_like(rhs)
        out[0] = (c * rhs[0] - b * rhs[1]) / det
        out[1] = (a * rhs[1] - b * rhs[0]) / det
        return out
    if s == 3:
        a, b, c = sub[0, 0], sub[0, 1], sub[0, 2]
        d, e, f = sub[1, 1], sub[1, 2], sub[2, 2]
        m00 = d * f - e * e
        m01 = c * e - b * f
        m02 = b * e - c * d
        det = a * m00 + b * m01 + c * m02
        if a <= 0 or a * d - b * b <= 0 or det <= 0:
            return None
        inv = np.array([[m00, m01, m02],
                        [m01, a * f - c * c, b * c - a * e],
                        [m02, b * c - a * e, a * d - b * b]]) / det
        return inv @ rhs
    try:
        chol = scipy.linalg.cho_factor(sub, check_finite=False)
    except scipy.linalg.LinAlgError:
        return None
    return scipy.linalg.cho_solve(chol, rhs, check_finite=False)


def _nnls_from_normal(AtA: np.ndarray, AtB: np.ndarray, fallback_system) -> np.ndarray:
    """Exact NNLS on the normal equations, one solution per column of AtB.

    The optimal support is found by checking the KKT conditions over every
    support, solving all columns against each candidate at once. Columns no
    support resolves (rank-deficient normal equations) fall back to scipy's
    Lawson-Hanson solver on the raw system produced by `fallback_system`.
    """
    k, q = AtB.shape
    G = np.zeros((k, q))
    grad_scale = np.abs(AtB).max(axis=0) + 1e-300
    pending = np.arange(q)
    for free, rest in _support_order(k):
        if pending.size == 0:
            break
        if free.size == 0:
            grad = -AtB[:, pending]
            ok = (grad >= -1e-9 * grad_scale[pending]).all(axis=0) if rest.size else \
                np.ones(pending.size, dtype=bool)
            pending = pending[~ok]
            continue
        sub = AtA[free[:, None], free[None, :]]
        x = _solve_psd(sub, AtB[free[:, None], pending[None, :]])
        if x is None:
            continue
        x_scale = np.abs(x).max(axis=0) + 1e-300
        ok = (x >= -1e-9 * x_scale).all(axis=0)
        if rest.size:
            grad = AtA[rest[:, None], free[None, :]] @ x - AtB[rest[:, None], pending[None, :]]
            ok &= (grad >= -1e-9 * grad_scale[pending]).all(axis=0)
        hit = pending[ok]
        G[free[:, None], hit[None, :]] = np.maximum(x[:, ok], 0.0)
        pending = pending[~ok]
    if pending.size:
        A, B = fallback_system()
        for j in pending:
            G[:, j] = scipy.optimize.nnls(A, B[:, j])[0]
    return G


def nnls_multiple(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Exact non-negative least squares min ||A G - B|| s.t. G >= 0, per column of B."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    k = A.shape[1]
    if k > MAX_ENUMERATED_RANK:
        G = np.zeros((k, B.shape[1]))
        for j in range(B.shape[1]):
            G[:, j] = scipy.optimize.nnls(A, B[:, j])[0]
        return G
    return _nnls_from_normal(A.T @ A, A.T @ B, lambda: (A, B))


def _penalized_objective(X, W, H, sh, sw):
    fit = float(((X - W @ H) ** 2).sum())
    return fit + sw * float((W.sum(axis=1) ** 2).sum()) + sh * float((H.sum(axis=0) ** 2).sum())


def reconstruction_error(X, W, H):
    return float(((X - W @ H) ** 2).sum())


def _run_restart(X, k, sh, sw, max_iters, rel_tol, rng):
    m, n = X.shape
    mean = float(X.mean())
    # W carries the data scale so that E[(W0 @ H0)_ij] = mean(X); keeping H0
    # dimensionless makes the whole trajectory scale linearly with X.
    scale = mean * math.pi / (2.0 * k) if mean > 0 else 1.0
    W = scale * np.abs(rng.standard_normal((m, k)))
    H = np.abs(rng.standard_normal((k, n)))

    sqrt_sh = math.sqrt(sh)
    sqrt_sw = math.sqrt(sw)
    Xt = X.T.copy()
    if k > MAX_ENUMERATED_RANK:
        # fall through to the raw augmented systems the generic solver needs
        def h_step(W):
            return nnls_multiple(np.vstack([W, sqrt_sh * np.ones((1, k))]),
                                 np.vstack([X, np.zeros((1, n))]))

        def w_step(H):
            return nnls_multiple(np.vstack([H.T, sqrt_sw * np.ones((1, k))]),
                                 np.vstack([Xt, np.zeros((1, m))])).T
    else:
        # the L1^2 augmentation only adds a constant sh (resp. sw) to every
        # entry of the normal matrix, so the raw system is built lazily
        def h_step(W):
            return _nnls_from_normal(
                W.T @ W + sh, W.T @ X,
                lambda: (np.vstack([W, sqrt_sh * np.ones((1, k))]),
                         np.vstack([X, np.zeros((1, n))])))

        def w_step(H):
            return _nnls_from_normal(
                H @ H.T + sw, H @ Xt,
                lambda: (np.vstack([H.T, sqrt_sw * np.ones((1, k))]),
                         np.vstack([Xt, np.zeros((1, m))]))).T

    history = [_penalized_objective(X, W, H, sh, sw)]
    for _ in range(max_iters):
        H = h_step(W)
        W = w_step(H)
        value = _penalized_objective(X, W, H, sh, sw)
        previous = history[-1]
        history.append(value)
        if abs(previous - value) <= rel_tol * max(abs(previous), 1e-300):
            break
    return W, H, history


def factorize(X, cfg: NmfConfig = NmfConfig(), row_sites=None) -> HotspotModel:
    """Best-of-restarts sparse NMF of a count matrix.

    `X` is a CrimeMatrix or a plain non-negative array. Deterministic for a
    given (X, cfg): every restart draws from its own stream derived from
    cfg.seed and the winner is the smallest reconstruction error (ties go to
    the lowest restart index).
    """
    if isinstance(X, CrimeMatrix):
        if row_sites is None:
            row_sites = X.row_sites
        data = np.asarray(X.X, dtype=float)
    else:
        data = np.asarray(X, dtype=float)
    if data.ndim != 2:
        raise ModelError("X must be a 2-d matrix")
    if np.any(data < 0):
        raise ModelError("X must be non-negative")
    m, n = data.shape
    if row_sites is None:
        row_sites = tuple(range(m))
    row_sites = tuple(row_sites)
    if len(row_sites) != m:
        raise ModelError("row_sites length does not match X")
    k = cfg.k
    if k > min(m, n):
        raise ModelError(f"rank k={k} exceeds min(m, n)={min(m, n)}", code="rank_too_large")

    if float(data.max(initial=0.0)) == 0.0:
        zero_w = np.zeros((m, k))
        zero_h = np.zeros((k, n))
        return HotspotModel(zero_w, zero_h, np.zeros((k, n), dtype=np.int8),
                            tuple(() for _ in range(k)), tuple(True for _ in range(k)),
                            0.0, tuple(0.0 for _ in range(cfg.restarts)), ((0.0,),) * cfg.restarts,
                            0, row_sites, cfg, X=data, degenerate=True)

    sh = cfg.sparsity_h if cfg.sparsity_h is not None else SPARSITY_H_SCALE * float(data.max()) ** 2
    sw = cfg.sparsity_w

    streams = [np.random.default_rng(s) for s in np.random.SeedSequence(cfg.seed).spawn(cfg.restarts)]
    results = []
    for rng in streams:
        W, H, history = _run_restart(data, k, sh, sw, cfg.max_iters, cfg.rel_tol, rng)
        results.append((W, H, history, reconstruction_error(data, W, H)))

    objectives = [r[3] for r in results]
    best = int(np.argmin(objectives))
    W, H, history, objective = results[best]

    H_bin = binarize_rows(H)
    memberships = extract_memberships(W, row_sites)
    peaks = [float(W[:, i].max()) * float(H[i].max()) for i in range(k)]
    peak_floor = NOISE_PEAK_REL * max(peaks)
    noise = tuple(bool(H_bin[i].sum() == 0 or len(memberships[i]) == 0
                       or peaks[i] < peak_floor) for i in range(k))
    return HotspotModel(W, H, H_bin, memberships, noise, objective,
                        tuple(objectives), tuple(tuple(r[2]) for r in results),
                        best, row_sites, cfg, X=data)


def gauge(model: HotspotModel, hotspot: int, X=None) -> GaugeStats:
    """Crime count, crime share, temporal frequency and importance of one hotspot."""
    if not 0 <= hotspot < model.k:
        raise ModelError(f"hotspot index {hotspot} out of range")
    data = model.X if X is None else (X.X if isinstance(X, CrimeMatrix) else np.asarray(X))
    total = float(data.sum())
    if total == 0:
        return GaugeStats(0, 0.0, 0.0, 0.0, degenerate=True)
    rows = [model.row_sites.index(site) for site in model.memberships[hotspot]]
    crime_count = int(data[rows, :].sum()) if rows else 0
    rate = crime_count / total
    frequency = float(model.H_bin[hotspot].sum()) / model.H_bin.shape[1]
    return GaugeStats(crime_count, rate, frequency, importance_score(rate, frequency))


def nmf_site_labels(model: HotspotModel) -> dict:
    """Binary site labels: 1 iff the site belongs to any non-noise hotspot."""
    hot = set()
    for members, noisy in zip(model.memberships, model.noise_flags):
        if not noisy:
            hot.update(members)
    return {site: (site in hot) for site in model.row_sites}


def model_to_dict(model: HotspotModel) -> dict:
    """JSON-ready export: factors, memberships, gauges, objectives, config echo."""
    gauges = [gauge(model, i) for i in range(model.k)]
    cfg = model.config
    return {
        "dims": {"m": len(model.row_sites), "n": model.H.shape[1], "k": model.k},
        "row_sites": list(model.row_sites),
        "W": [[float(v) for v in row] for row in model.W],
        "H": [[float(v) for v in row] for row in model.H],
        "H_bin": [[int(v) for v in row] for row in model.H_bin],
        "memberships": [list(m) for m in model.memberships],
        "noise_flags": list(model.noise_flags),
        "objective": model.objective,
        "restart_objectives": list(model.restart_objectives),
        "best_restart": model.best_restart,
        "degenerate": model.degenerate,
        "gauges": [
            {"crime_count": g.crime_count, "rate_of_crimes": g.rate_of_crimes,
             "frequency": g.frequency, "importance": g.importance,
             "degenerate": g.degenerate}
            for g in gauges
        ],
        "config": {
            "k": cfg.k, "sparsity_w": cfg.sparsity_w, "sparsity_h": cfg.sparsity_h,
            "max_iters": cfg.max_iters, "rel_tol": cfg.rel_tol,
            "restarts": cfg.restarts, "seed": cfg.seed,
        },
    }


def with_rank(cfg: NmfConfig, k: int) -> NmfConfig:
    return replace(cfg, k=k)

"""Alternating-minimization engine for k-means family clusterers.

One Lloyd-style loop serves squared-Euclidean k-means (p = 2), k-medians
(p = 1), and Minkowski k-means (general p >= 1): assign each entity to its
nearest centroid under the p-th power Minkowski distance, then move each
centroid to the per-feature Minkowski center of its cluster, until the
assignment vector stops changing.  Clusters that empty out mid-run are
re-seeded with the entity farthest from their current centroid so the
cluster count stays constant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .centers import DEFAULT_SOLVER, CenterSolverConfig, batched_cluster_centers
from .dataset import DataMatrix, ensure_standardized
from .metric import WeightMatrix, abs_power, point_centroid_distances

__all__ = [
    "ConvergenceError",
    "Clustering",
    "RestartPolicy",
    "MAX_SWEEPS",
    "lloyd",
    "kmeans",
    "kmeans_multistart",
    "criterion",
    "euclidean_wk",
]

# hard cap on full assign/update sweeps; exceeding it is treated as a bug
MAX_SWEEPS = 1000

_SEED_MASK = (1 << 64) - 1


class ConvergenceError(RuntimeError):
    """Raised when the assignment loop fails to stabilize within MAX_SWEEPS."""


@dataclass
class Clustering:
    """Result of a clustering run.

    ``criterion_value`` is the within-cluster sum of p-th power distances
    (feature-weighted when ``weights`` is present) at the returned
    assignments and centroids.  ``criterion_trace`` holds that criterion
    after each assignment sweep, which is non-increasing over the run.
    """

    assignments: np.ndarray
    centroids: np.ndarray
    weights: WeightMatrix | None
    criterion_value: float
    k: int
    criterion_trace: tuple[float, ...] = field(default=(), repr=False)

    def __post_init__(self):
        a = np.asarray(self.assignments, dtype=np.int64)
        counts = np.bincount(a, minlength=self.k)
        if a.min() < 0 or a.max() >= self.k:
            raise ValueError("assignments outside [0, k)")
        if (counts == 0).any():
            raise ValueError(f"empty cluster(s): {np.flatnonzero(counts == 0).tolist()}")
        self.assignments = a
        self.centroids = np.asarray(self.centroids, dtype=np.float64)

    @property
    def cluster_sizes(self) -> np.ndarray:
        return np.bincount(self.assignments, minlength=self.k)


@dataclass(frozen=True)
class RestartPolicy:
    """How many random restarts to run and the seed that drives them."""

    n_restarts: int = 100
    rng_seed: int = 0

    def __post_init__(self):
        if self.n_restarts < 1:
            raise ValueError("n_restarts must be >= 1")

    def restart_rng(self, restart: int) -> np.random.Generator:
        """Independent generator for one restart, a pure function of (seed, restart)."""
        seq = np.random.SeedSequence((self.rng_seed & _SEED_MASK, restart))
        return np.random.default_rng(seq)


def _repair_empty(Y, centroids, distances, labels, k, p, fixed, weight_powers=None):
    """Re-seed empty clusters at the entity farthest from their centroid.

    Fixed (pinned) centroids are left alone even if their cluster is empty.
    Returns the final labels; raises on degenerate data where some cluster
    cannot be populated.
    """
    for _ in range(k + 1):
        counts = np.bincount(labels, minlength=k)
        empties = [j for j in range(k) if counts[j] == 0 and j not in fixed]
        if not empties:
            return labels
        for j in empties:
            far = int(distances[:, j].argmax())
            centroids[j] = Y[far]
            wp = None if weight_powers is None else weight_powers[j : j + 1]
            distances[:, j] = point_centroid_distances(Y, centroids[j : j + 1], p, wp)[:, 0]
        labels = distances.argmin(axis=1)
    raise ConvergenceError(
        "could not keep all clusters nonempty; data is degenerate for this k"
    )


def _lloyd_p2(Y, C, fixed):
    """Lean squared-Euclidean loop (most of the harness's compute lives here)."""
    n, k = Y.shape[0], C.shape[0]
    rows = np.arange(n)
    y_norms = (Y * Y).sum(axis=1)
    labels_prev = None
    trace: list[float] = []
    for _ in range(MAX_SWEEPS):
        D = y_norms[:, None] - 2.0 * (Y @ C.T) + (C * C).sum(axis=1)[None, :]
        np.maximum(D, 0.0, out=D)
        labels = D.argmin(axis=1)
        counts = np.bincount(labels, minlength=k)
        if (counts == 0).any():
            labels = _repair_empty(Y, C, D, labels, k, 2.0, fixed)
            counts = np.bincount(labels, minlength=k)
        trace.append(float(D[rows, labels].sum()))
        if labels_prev is not None and np.array_equal(labels, labels_prev):
            return labels, C, trace
        membership = np.zeros((n, k))
        membership[rows, labels] = 1.0
        means = (membership.T @ Y) / np.maximum(counts, 1)[:, None]
        if fixed:
            # pinned rows keep their centroid (repair guarantees the rest nonempty)
            means[list(fixed)] = C[list(fixed)]
        C = means
        labels_prev = labels
    raise ConvergenceError(f"no convergence within {MAX_SWEEPS} sweeps")


def lloyd(
    Y: np.ndarray,
    init_centroids: np.ndarray,
    p: float,
    solver_cfg: CenterSolverConfig = DEFAULT_SOLVER,
    fixed: frozenset[int] | set[int] = frozenset(),
):
    """Run the assign/update loop on a raw value matrix.

    Returns ``(labels, centroids, trace)`` where ``trace[t]`` is the
    criterion after the t-th assignment sweep.  Centroid indices in
    ``fixed`` are never moved (used by anomalous-pattern extraction).
    """
    n = Y.shape[0]
    C = np.array(init_centroids, dtype=np.float64)
    if p == 2.0 and not solver_cfg.use_paper_stepping:
        return _lloyd_p2(Y, C, fixed)
    k = C.shape[0]
    rows = np.arange(n)
    labels_prev = None
    trace: list[float] = []
    for _ in range(MAX_SWEEPS):
        D = point_centroid_distances(Y, C, p)
        labels = D.argmin(axis=1)
        labels = _repair_empty(Y, C, D, labels, k, p, fixed)
        trace.append(float(D[rows, labels].sum()))
        if labels_prev is not None and np.array_equal(labels, labels_prev):
            return labels, C, trace
        membership = np.zeros((n, k))
        membership[rows, labels] = 1.0
        C = batched_cluster_centers(Y, membership, labels, p, solver_cfg, C, skip=fixed)
        labels_prev = labels
    raise ConvergenceError(f"no convergence within {MAX_SWEEPS} sweeps")


def _validate_init(init, k, v):
    init = np.asarray(init, dtype=np.float64)
    if init.shape != (k, v):
        raise ValueError(f"init must have shape ({k}, {v}), got {init.shape}")
    if np.unique(init, axis=0).shape[0] != k:
        raise ValueError("initial centroids must be distinct")
    return init


def kmeans(
    data: DataMatrix,
    k: int,
    p: float,
    init: np.ndarray,
    cfg: CenterSolverConfig = DEFAULT_SOLVER,
) -> Clustering:
    """Unweighted Minkowski k-means from explicit initial centroids.

    ``p=2`` is classic squared-Euclidean k-means, ``p=1`` is k-medians.
    Raw data is range-standardized automatically.
    """
    data = ensure_standardized(data)
    if p < 1.0:
        raise ValueError(f"p must be >= 1, got {p}")
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > data.n_entities:
        raise ValueError(f"k={k} exceeds the number of entities {data.n_entities}")
    init = _validate_init(init, k, data.n_features)
    labels, centroids, trace = lloyd(data.values, init, p, cfg)
    return Clustering(
        assignments=labels,
        centroids=centroids,
        weights=None,
        criterion_value=trace[-1],
        k=k,
        criterion_trace=tuple(trace),
    )


def kmeans_multistart(
    data: DataMatrix,
    k: int,
    p: float,
    policy: RestartPolicy,
    cfg: CenterSolverConfig = DEFAULT_SOLVER,
    extra_inits: tuple[np.ndarray, ...] = (),
) -> Clustering:
    """Best of ``policy.n_restarts`` seeded random k-means runs.

    Each restart starts from k distinct entities sampled without
    replacement using a generator derived from (seed, restart index), so
    the result does not depend on execution order.  ``extra_inits`` adds
    deterministic extra starting points after the random restarts.
    """
    data = ensure_standardized(data)
    if k > data.n_entities:
        raise ValueError(f"k={k} exceeds the number of entities {data.n_entities}")
    Y = data.values
    best: Clustering | None = None
    for r in range(policy.n_restarts):
        rng = policy.restart_rng(r)
        init = Y[rng.choice(data.n_entities, size=k, replace=False)]
        for _ in range(10):
            if np.unique(init, axis=0).shape[0] == k:
                break
            init = Y[rng.choice(data.n_entities, size=k, replace=False)]
        result = kmeans(data, k, p, init, cfg)
        if best is None or result.criterion_value < best.criterion_value:
            best = result
    for init in extra_inits:
        result = kmeans(data, k, p, init, cfg)
        if result.criterion_value < best.criterion_value:
            best = result
    return best


def criterion(data: DataMatrix, clustering: Clustering, p: float) -> float:
    """Recompute the within-cluster criterion for a clustering.

    Uses the feature-weighted distance when the clustering carries
    weights, the plain p-th power Minkowski distance otherwise.
    """
    Y = data.values
    labels = clustering.assignments
    if Y.shape[0] != labels.shape[0]:
        raise ValueError("data and assignments disagree on the number of entities")
    if clustering.centroids.shape[1] != Y.shape[1]:
        raise ValueError("data and centroids disagree on the number of features")
    wp = None
    if clustering.weights is not None:
        wp = abs_power(clustering.weights.weights, p)
    D = point_centroid_distances(Y, clustering.centroids, p, wp)
    return float(D[np.arange(Y.shape[0]), labels].sum())


def euclidean_wk(data, clustering_or_labels) -> float:
    """Squared-Euclidean within-cluster sum about recomputed cluster means.

    Works for clusterings produced under any p: the stored centroids are
    ignored and each cluster's Euclidean mean is used instead.  This is
    what the Calinski-Harabasz and Hartigan indexes consume.
    """
    Y = data.values if hasattr(data, "values") else np.asarray(data, dtype=np.float64)
    labels = (
        clustering_or_labels.assignments
        if hasattr(clustering_or_labels, "assignments")
        else np.asarray(clustering_or_labels, dtype=np.int64)
    )
    if Y.shape[0] != labels.shape[0]:
        raise ValueError("data and assignments disagree on the number of entities")
    total = 0.0
    for j in np.unique(labels):
        block = Y[labels == j]
        total += float(((block - block.mean(axis=0)) ** 2).sum())
    return total

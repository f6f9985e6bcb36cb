"""Minkowski weighted k-means: alternating assignments, centers, weights.

Each cluster carries its own feature-weight row on the unit simplex.  The
criterion is ``sum_k sum_{i in S_k} sum_v w_kv^p |y_iv - c_kv|^p``; for
fixed assignments and centroids the optimal weights are

    w_kv = 1 / sum_u (D_kv / D_ku)^(1/(p-1)),

where ``D_kv`` is the within-cluster dispersion of feature v.  Features
that vary little inside a cluster get large weights.  To keep a zero
dispersion from producing degenerate one-hot weights, the mean dispersion
over all clusters and features is added to every entry before the update
(the production default).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .centers import DEFAULT_SOLVER, CenterSolverConfig, batched_cluster_centers
from .dataset import DataMatrix, ensure_standardized
from .metric import MinkowskiConfig, WeightMatrix, abs_power, point_centroid_distances
from .partition import (
    MAX_SWEEPS,
    Clustering,
    ConvergenceError,
    RestartPolicy,
    _repair_empty,
    _validate_init,
)

__all__ = [
    "DispersionTable",
    "dispersions",
    "update_weights",
    "mwk_lloyd",
    "mwk_means",
    "mwk_multistart",
]


@dataclass(frozen=True)
class DispersionTable:
    """K x V within-cluster feature dispersions, shifted by ``offset``.

    ``dispersions[k, v] = sum_{i in S_k} |y_iv - c_kv|^p + offset`` where
    ``offset`` is the mean raw dispersion when the offset is enabled, else 0.
    """

    dispersions: np.ndarray
    offset: float


def _raw_dispersions(Y, labels, centroids, p):
    k = centroids.shape[0]
    out = np.zeros((k, Y.shape[1]))
    for j in range(k):
        members = labels == j
        if members.any():
            out[j] = abs_power(Y[members] - centroids[j], p).sum(axis=0)
    return out


def dispersions(
    data: DataMatrix, clustering: Clustering, p: float, offset_enabled: bool = True
) -> DispersionTable:
    """Within-cluster per-feature dispersion table for a clustering."""
    Y = data.values
    if Y.shape[0] != clustering.assignments.shape[0]:
        raise ValueError("data and assignments disagree on the number of entities")
    if Y.shape[1] != clustering.centroids.shape[1]:
        raise ValueError("data and centroids disagree on the number of features")
    raw = _raw_dispersions(Y, clustering.assignments, clustering.centroids, p)
    offset = float(raw.mean()) if offset_enabled else 0.0
    return DispersionTable(dispersions=raw + offset, offset=offset)


def _weights_from_dispersions(disp: np.ndarray, p: float) -> np.ndarray:
    """Row-stochastic weights from (already offset) positive dispersions.

    Computed in log space so exponents 1/(p-1) far above 1 (p close to 1)
    neither overflow nor underflow; in that regime the row collapses onto
    its minimum-dispersion feature, which is the correct limit.
    """
    exponent = 1.0 / (p - 1.0)
    zero_rows = (disp == 0.0).all(axis=1)
    if ((disp == 0.0) & ~zero_rows[:, None]).any():
        raise ValueError("zero dispersion entries; enable the dispersion offset")
    out = np.empty_like(disp)
    if zero_rows.any():
        # fully collapsed clusters carry no preference between features
        out[zero_rows] = 1.0 / disp.shape[1]
    rows = ~zero_rows
    if rows.any():
        log_w = -exponent * np.log(disp[rows])
        log_w -= log_w.max(axis=1, keepdims=True)
        w = np.exp(log_w)
        out[rows] = w / w.sum(axis=1, keepdims=True)
    return out


def update_weights(disp: DispersionTable, p: float) -> WeightMatrix:
    """Optimal feature weights for fixed assignments and centroids.

    Undefined at p = 1 (the exponent 1/(p-1) blows up); weighted runs that
    want the p -> 1 behaviour use the near-one stand-in exponent instead.
    """
    if p <= 1.0:
        raise ValueError(f"weight update requires p > 1, got {p}")
    d = np.asarray(disp.dispersions, dtype=np.float64)
    if (d < 0).any():
        raise ValueError("dispersions must be nonnegative")
    return WeightMatrix(_weights_from_dispersions(d, p))


def mwk_lloyd(
    Y: np.ndarray,
    init_centroids: np.ndarray,
    init_weights: np.ndarray,
    p: float,
    offset_enabled: bool = True,
    solver_cfg: CenterSolverConfig = DEFAULT_SOLVER,
    fixed: frozenset[int] | set[int] = frozenset(),
):
    """Weighted assign/update/reweight loop on a raw value matrix.

    Returns ``(labels, centroids, weights, trace)``; ``trace[t]`` is the
    weighted criterion after the t-th assignment sweep.  Centroid indices
    in ``fixed`` are pinned (their weights still update).
    """
    n = Y.shape[0]
    C = np.array(init_centroids, dtype=np.float64)
    W = np.array(init_weights, dtype=np.float64)
    k = C.shape[0]
    rows = np.arange(n)
    labels_prev = None
    trace: list[float] = []
    for _ in range(MAX_SWEEPS):
        wp = abs_power(W, p)
        D = point_centroid_distances(Y, C, p, wp)
        labels = D.argmin(axis=1)
        labels = _repair_empty(Y, C, D, labels, k, p, fixed, weight_powers=wp)
        trace.append(float(D[rows, labels].sum()))
        if labels_prev is not None and np.array_equal(labels, labels_prev):
            return labels, C, W, trace
        membership = np.zeros((n, k))
        membership[rows, labels] = 1.0
        C = batched_cluster_centers(Y, membership, labels, p, solver_cfg, C, skip=fixed)
        raw = membership.T @ abs_power(Y - C[labels], p)
        offset = raw.mean() if offset_enabled else 0.0
        W = _weights_from_dispersions(raw + offset, p)
        labels_prev = labels
    raise ConvergenceError(f"no convergence within {MAX_SWEEPS} sweeps")


def mwk_means(
    data: DataMatrix,
    k: int,
    p: float,
    init_centroids: np.ndarray,
    init_weights: WeightMatrix | np.ndarray | None = None,
    mink_cfg: MinkowskiConfig | None = None,
    solver_cfg: CenterSolverConfig = DEFAULT_SOLVER,
) -> Clustering:
    """Minkowski weighted k-means from explicit initial centroids.

    ``init_weights`` defaults to uniform rows 1/V.  Requires p > 1; for
    the p -> 1 limit pass the near-one stand-in exponent.
    """
    data = ensure_standardized(data)
    if p <= 1.0:
        raise ValueError(f"mwk_means requires p > 1, got {p}")
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > data.n_entities:
        raise ValueError(f"k={k} exceeds the number of entities {data.n_entities}")
    init_centroids = _validate_init(init_centroids, k, data.n_features)
    if init_weights is None:
        W0 = np.full((k, data.n_features), 1.0 / data.n_features)
    else:
        W0 = WeightMatrix(getattr(init_weights, "weights", init_weights)).weights
        if W0.shape != (k, data.n_features):
            raise ValueError(f"init weights must have shape ({k}, {data.n_features})")
    offset_enabled = True if mink_cfg is None else mink_cfg.dispersion_offset_enabled
    labels, centroids, weights, trace = mwk_lloyd(
        data.values, init_centroids, W0, p, offset_enabled, solver_cfg
    )
    return Clustering(
        assignments=labels,
        centroids=centroids,
        weights=WeightMatrix(weights),
        criterion_value=trace[-1],
        k=k,
        criterion_trace=tuple(trace),
    )


def mwk_multistart(
    data: DataMatrix,
    k: int,
    p: float,
    policy: RestartPolicy,
    mink_cfg: MinkowskiConfig | None = None,
    solver_cfg: CenterSolverConfig = DEFAULT_SOLVER,
) -> Clustering:
    """Best of seeded random-entity restarts of mwk_means (uniform initial weights)."""
    data = ensure_standardized(data)
    Y = data.values
    best = None
    for r in range(policy.n_restarts):
        rng = policy.restart_rng(r)
        init = Y[rng.choice(data.n_entities, size=k, replace=False)]
        for _ in range(10):
            if np.unique(init, axis=0).shape[0] == k:
                break
            init = Y[rng.choice(data.n_entities, size=k, replace=False)]
        result = mwk_means(data, k, p, init, None, mink_cfg, solver_cfg)
        if best is None or result.criterion_value < best.criterion_value:
            best = result
    return best

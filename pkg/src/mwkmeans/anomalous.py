"""Anomalous-pattern initialization (intelligent k-means and its weighted form).

Anomalous patterns are extracted one at a time: put one centroid at the
center of the data still to be clustered and another at the entity
farthest from it, run the two-cluster loop with the center pinned, record
the far cluster's centroid (and weights, in weighted mode) if it has at
least ``theta`` members, remove its entities, and repeat until nothing is
left.  The number of recorded patterns caps the range over which the
number of clusters is searched, and the recorded centroids and weights
make the weighted k-means run for a given k fully deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .centers import DEFAULT_SOLVER, CenterSolverConfig, minkowski_center_columns
from .dataset import DataMatrix, ensure_standardized
from .metric import MinkowskiConfig, abs_power, effective_p, point_centroid_distances
from .mwk import mwk_lloyd, mwk_means
from .partition import Clustering, lloyd

__all__ = [
    "AnomalousInit",
    "extract_anomalous",
    "k_search_cap",
    "truncate_to_k",
    "imwk_means",
]


@dataclass(frozen=True)
class AnomalousInit:
    """Centroids, weight rows, and sizes of the extracted anomalous clusters.

    Entries are kept in extraction order; sizes are the anomalous-cluster
    cardinalities at extraction time.  Weight rows are uniform in
    unweighted mode.
    """

    centroids: np.ndarray
    weights: np.ndarray
    cluster_sizes: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.centroids, dtype=np.float64)
        w = np.asarray(self.weights, dtype=np.float64)
        s = np.asarray(self.cluster_sizes, dtype=np.int64)
        if not (c.shape[0] == w.shape[0] == s.shape[0]):
            raise ValueError("centroids, weights and cluster_sizes must have equal length")
        object.__setattr__(self, "centroids", c)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "cluster_sizes", s)

    def __len__(self) -> int:
        return int(self.cluster_sizes.shape[0])


def extract_anomalous(
    data: DataMatrix,
    p: float,
    theta: int,
    weighted: bool,
    mink_cfg: MinkowskiConfig | None = None,
    solver_cfg: CenterSolverConfig = DEFAULT_SOLVER,
) -> AnomalousInit:
    """Extract anomalous patterns until every entity has been removed.

    The reference center of the remaining data is the per-feature
    Minkowski center at exponent p (the mean when p = 2).  In weighted
    mode each extraction restarts from uniform weights and runs the
    weighted two-cluster loop; the anomalous cluster's final weight row is
    recorded alongside its centroid.
    """
    data = ensure_standardized(data)
    if theta < 0:
        raise ValueError("theta must be >= 0")
    p_eff = effective_p(p, weighted)
    offset_enabled = True if mink_cfg is None else mink_cfg.dispersion_offset_enabled
    Y = data.values
    n, v = Y.shape
    uniform = np.full(v, 1.0 / v)

    kept_centroids: list[np.ndarray] = []
    kept_weights: list[np.ndarray] = []
    kept_sizes: list[int] = []

    remaining = np.ones(n, dtype=bool)
    while remaining.any():
        idx = np.flatnonzero(remaining)
        rem = Y[idx]
        center = minkowski_center_columns(rem, p_eff, solver_cfg)
        wp = abs_power(uniform[None, :], p_eff) if weighted else None
        dist = point_centroid_distances(rem, center[None, :], p_eff, wp)[:, 0]
        far = int(dist.argmax())

        if dist[far] <= 0.0:
            # everything left coincides with the center: one last cluster
            members = np.ones(idx.shape[0], dtype=bool)
            tentative_centroid = rem[0].copy()
            tentative_weights = uniform.copy()
        else:
            init_c = np.stack([rem[far], center])
            if weighted:
                init_w = np.stack([uniform, uniform])
                labels, cfin, wfin, _ = mwk_lloyd(
                    rem, init_c, init_w, p_eff, offset_enabled, solver_cfg, fixed={1}
                )
                tentative_weights = wfin[0].copy()
            else:
                labels, cfin, _ = lloyd(rem, init_c, p_eff, solver_cfg, fixed={1})
                tentative_weights = uniform.copy()
            members = labels == 0
            tentative_centroid = cfin[0].copy()

        size = int(members.sum())
        if size >= theta:
            kept_centroids.append(tentative_centroid)
            kept_weights.append(tentative_weights)
            kept_sizes.append(size)
        remaining[idx[members]] = False

    if kept_centroids:
        return AnomalousInit(
            np.stack(kept_centroids), np.stack(kept_weights), np.array(kept_sizes)
        )
    return AnomalousInit(np.empty((0, v)), np.empty((0, v)), np.empty(0, dtype=np.int64))


def k_search_cap(init: AnomalousInit, hard_cap: int) -> int:
    """Upper end of the k search range: min(number of patterns, hard_cap)."""
    if hard_cap < 2:
        raise ValueError("hard_cap must be >= 2")
    if len(init) < 2:
        raise ValueError(
            f"only {len(init)} anomalous pattern(s) extracted; no k range to search"
        )
    return min(len(init), hard_cap)


def truncate_to_k(init: AnomalousInit, k: int) -> AnomalousInit:
    """Keep the k patterns with the largest clusters (earlier extraction wins ties)."""
    m = len(init)
    if k > m:
        raise ValueError(f"cannot keep k={k} of {m} patterns")
    order = sorted(range(m), key=lambda i: (-int(init.cluster_sizes[i]), i))
    keep = sorted(order[:k])
    return AnomalousInit(
        init.centroids[keep], init.weights[keep], init.cluster_sizes[keep]
    )


def imwk_means(
    data: DataMatrix,
    k: int,
    p: float,
    mink_cfg: MinkowskiConfig | None = None,
    solver_cfg: CenterSolverConfig = DEFAULT_SOLVER,
    init: AnomalousInit | None = None,
) -> Clustering:
    """Weighted Minkowski k-means initialized from anomalous patterns.

    Runs the weighted extraction with theta = 1, keeps the k largest
    patterns, and starts the weighted k-means from their centroids and
    weight rows.  Deterministic: there is no randomness on this path.  A
    precomputed ``init`` (from ``extract_anomalous``) may be supplied to
    avoid re-extracting when sweeping k.
    """
    data = ensure_standardized(data)
    if init is None:
        init = extract_anomalous(data, p, theta=1, weighted=True,
                                 mink_cfg=mink_cfg, solver_cfg=solver_cfg)
    if len(init) < k:
        raise ValueError(
            f"anomalous extraction produced {len(init)} pattern(s), fewer than k={k}"
        )
    trunc = truncate_to_k(init, k)
    p_eff = effective_p(p, weighted=True)
    return mwk_means(
        data, k, p_eff, trunc.centroids, trunc.weights, mink_cfg, solver_cfg
    )

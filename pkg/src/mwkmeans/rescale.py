"""Feature re-scaling views and the three per-k evaluation pipelines.

A weighted clustering implicitly re-scales the data: entity values are
multiplied by the feature weights of their own cluster.  Making that
re-scaling explicit gives a view ``Y_w`` (and matching centroids ``C_w``)
on which validity indexes, or a fresh k-means, can be run.  The three
pipelines produced here differ only in what the indexes see per candidate k:

1. the weighted clustering scored on the original standardized data;
2. the same clustering scored on the re-scaled view;
3. a fresh multi-restart k-means on the re-scaled view, scored there.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .anomalous import AnomalousInit, extract_anomalous, imwk_means
from .centers import DEFAULT_SOLVER, CenterSolverConfig
from .dataset import DataMatrix, ensure_standardized
from .metric import MinkowskiConfig
from .partition import Clustering, RestartPolicy, kmeans_multistart
from .seeding import stable_seed

__all__ = [
    "RescaledView",
    "PipelineEntry",
    "rescale_view",
    "pipeline_imwk",
    "pipeline_imwk_rescaled",
    "pipeline_rescale_kmeans",
]


@dataclass(frozen=True)
class RescaledView:
    """Data and centroids with each cluster's feature weights multiplied in."""

    data_w: DataMatrix
    centroids_w: np.ndarray
    source: Clustering


@dataclass(frozen=True)
class PipelineEntry:
    """One candidate k: the clustering to report plus what the indexes see."""

    k: int
    clustering: Clustering
    cvi_data: DataMatrix
    cvi_centroids: np.ndarray


def rescale_view(data: DataMatrix, clustering: Clustering) -> RescaledView:
    """Multiply entity values by their cluster's weight row, centroids likewise."""
    if clustering.weights is None:
        raise ValueError("clustering carries no feature weights to re-scale with")
    w = clustering.weights.weights
    if w.shape[1] != data.n_features:
        raise ValueError("weights and data disagree on the number of features")
    values_w = data.values * w[clustering.assignments]
    return RescaledView(
        data_w=DataMatrix(values_w, standardized=data.standardized),
        centroids_w=clustering.centroids * w,
        source=clustering,
    )


def _imwk_per_k(data, k_range, p, mink_cfg, solver_cfg, init):
    if init is None:
        init = extract_anomalous(data, p, theta=1, weighted=True,
                                 mink_cfg=mink_cfg, solver_cfg=solver_cfg)
    return [
        (k, imwk_means(data, k, p, mink_cfg, solver_cfg, init=init)) for k in k_range
    ]


def pipeline_imwk(
    data: DataMatrix,
    k_range,
    p: float,
    mink_cfg: MinkowskiConfig | None = None,
    solver_cfg: CenterSolverConfig = DEFAULT_SOLVER,
    init: AnomalousInit | None = None,
) -> list[PipelineEntry]:
    """Weighted clusterings per k, scored on the original standardized data."""
    data = ensure_standardized(data)
    return [
        PipelineEntry(k=k, clustering=c, cvi_data=data, cvi_centroids=c.centroids)
        for k, c in _imwk_per_k(data, k_range, p, mink_cfg, solver_cfg, init)
    ]


def pipeline_imwk_rescaled(
    data: DataMatrix,
    k_range,
    p: float,
    mink_cfg: MinkowskiConfig | None = None,
    solver_cfg: CenterSolverConfig = DEFAULT_SOLVER,
    init: AnomalousInit | None = None,
    base: list[PipelineEntry] | None = None,
) -> list[PipelineEntry]:
    """Same clusterings as pipeline_imwk, scored on their re-scaled views.

    ``base`` may pass the entries of a previous ``pipeline_imwk`` call to
    avoid re-clustering.
    """
    data = ensure_standardized(data)
    if base is None:
        base = pipeline_imwk(data, k_range, p, mink_cfg, solver_cfg, init)
    out = []
    for entry in base:
        view = rescale_view(data, entry.clustering)
        out.append(
            PipelineEntry(
                k=entry.k,
                clustering=entry.clustering,
                cvi_data=view.data_w,
                cvi_centroids=view.centroids_w,
            )
        )
    return out


def _euclidean_means(Y, labels, k):
    return np.stack([Y[labels == j].mean(axis=0) for j in range(k)])


def pipeline_rescale_kmeans(
    data: DataMatrix,
    k_range,
    p: float,
    policy: RestartPolicy,
    mink_cfg: MinkowskiConfig | None = None,
    solver_cfg: CenterSolverConfig = DEFAULT_SOLVER,
    init: AnomalousInit | None = None,
    base: list[PipelineEntry] | None = None,
) -> list[PipelineEntry]:
    """Re-scale per k, re-cluster the view with multi-restart k-means, score there.

    For each k the view is built from the weighted clustering at that same
    k.  On top of the random restarts, one extra start from the Euclidean
    means of the weighted partition on the view guarantees the re-clustering
    never ends worse than the partition it started from.
    """
    data = ensure_standardized(data)
    if base is None:
        base = pipeline_imwk(data, k_range, p, mink_cfg, solver_cfg, init)
    out = []
    for entry in base:
        view = rescale_view(data, entry.clustering)
        Yw = view.data_w
        extra = ()
        means = _euclidean_means(Yw.values, entry.clustering.assignments, entry.k)
        if np.unique(means, axis=0).shape[0] == entry.k:
            extra = (means,)
        per_k_policy = RestartPolicy(
            n_restarts=policy.n_restarts,
            rng_seed=stable_seed(policy.rng_seed, "rescale_kmeans", entry.k),
        )
        reclustered = kmeans_multistart(
            Yw, entry.k, 2.0, per_k_policy, solver_cfg, extra_inits=extra
        )
        out.append(
            PipelineEntry(
                k=entry.k,
                clustering=reclustered,
                cvi_data=Yw,
                cvi_centroids=reclustered.centroids,
            )
        )
    return out

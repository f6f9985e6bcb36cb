"""Minkowski distance kernels, unweighted and feature-weighted.

All distances here are the p-th *power* of the Minkowski metric (no p-th
root), by analogy with k-means using the squared rather than plain
Euclidean distance: ``d_p(a, b) = sum_v |a_v - b_v|^p``.  The weighted
form scales each coordinate gap by a feature weight raised to the same
power p, which makes the weights act as per-cluster feature re-scaling
factors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "P_NEAR_ONE",
    "MinkowskiConfig",
    "WeightMatrix",
    "effective_p",
    "minkowski_p",
    "weighted_minkowski_p",
    "abs_power",
    "point_centroid_distances",
]

# Stand-in for the p -> 1 limit: the weight update is undefined at p = 1
# (its exponent 1/(p-1) blows up), so "p -> 1" runs use this value.
P_NEAR_ONE = 1.00001

WEIGHT_ROW_TOL = 1e-9


@dataclass(frozen=True)
class MinkowskiConfig:
    """Distance exponent and dispersion-offset policy.

    ``p`` must be >= 1.  ``dispersion_offset_enabled`` controls whether the
    weight update adds the mean dispersion to every cluster/feature
    dispersion (production default; disabling it is only meaningful in
    optimality tests).
    """

    p: float = 2.0
    p_near_one: float = P_NEAR_ONE
    dispersion_offset_enabled: bool = True

    def __post_init__(self):
        if not np.isfinite(self.p) or self.p < 1.0:
            raise ValueError(f"p must be a finite real >= 1, got {self.p}")
        if self.p_near_one != P_NEAR_ONE:
            raise ValueError(f"p_near_one must be exactly {P_NEAR_ONE}")

    def effective_p(self, weighted: bool) -> float:
        return effective_p(self.p, weighted, self.p_near_one)


def effective_p(p: float, weighted: bool, p_near_one: float = P_NEAR_ONE) -> float:
    """Resolve the exponent actually used by a clustering run.

    Exact p = 1 is fine for unweighted k-medians, but a weighted run at
    p = 1 would put all weight on a single feature; such requests are
    mapped to ``p_near_one`` instead.
    """
    if p < 1.0:
        raise ValueError(f"p must be >= 1, got {p}")
    if weighted and p == 1.0:
        return p_near_one
    return p


@dataclass(frozen=True)
class WeightMatrix:
    """K x V feature weights, one simplex row per cluster."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 2:
            raise ValueError(f"weights must be 2-D, got ndim={w.ndim}")
        if (w < 0).any():
            raise ValueError("weights must be nonnegative")
        sums = w.sum(axis=1)
        if np.abs(sums - 1.0).max() > WEIGHT_ROW_TOL:
            raise ValueError(f"weight rows must sum to 1, got sums {sums}")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, k: int, v: int) -> "WeightMatrix":
        return cls(np.full((k, v), 1.0 / v))


def abs_power(x: np.ndarray, p: float) -> np.ndarray:
    """Elementwise |x|^p with fast paths for the common exponents."""
    if p == 2.0:
        return x * x
    if p == 1.0:
        return np.abs(x)
    return np.abs(x) ** p


def minkowski_p(a, b, p: float) -> float:
    """p-th power Minkowski distance between two feature vectors."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    if p < 1.0:
        raise ValueError(f"p must be >= 1, got {p}")
    return float(abs_power(a - b, p).sum())


def weighted_minkowski_p(a, b, w, p: float) -> float:
    """Feature-weighted p-th power Minkowski distance: sum_v w_v^p |a_v - b_v|^p."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if a.shape != b.shape or a.shape != w.shape:
        raise ValueError(f"length mismatch: {a.shape}, {b.shape}, weights {w.shape}")
    if (w < 0).any():
        raise ValueError("weights must be nonnegative")
    return float((abs_power(w, p) * abs_power(a - b, p)).sum())


def point_centroid_distances(
    Y: np.ndarray,
    centroids: np.ndarray,
    p: float,
    weight_powers: np.ndarray | None = None,
) -> np.ndarray:
    """Distance from every entity to every centroid, as an (N, K) matrix.

    ``weight_powers`` is the precomputed K x V matrix of w_kv^p; pass None
    for the unweighted distance.
    """
    Y = np.asarray(Y, dtype=np.float64)
    centroids = np.atleast_2d(np.asarray(centroids, dtype=np.float64))
    n = Y.shape[0]
    k = centroids.shape[0]
    if centroids.shape[1] != Y.shape[1]:
        raise ValueError(
            f"feature mismatch: data has {Y.shape[1]}, centroids have {centroids.shape[1]}"
        )
    if weight_powers is None and p == 2.0:
        # ||y||^2 - 2 y.c + ||c||^2; the cross term is one matmul
        d = (
            (Y * Y).sum(axis=1)[:, None]
            - 2.0 * (Y @ centroids.T)
            + (centroids * centroids).sum(axis=1)[None, :]
        )
        np.maximum(d, 0.0, out=d)
        return d
    out = np.empty((n, k))
    for j in range(k):
        gaps = abs_power(Y - centroids[j], p)
        if weight_powers is None:
            out[:, j] = gaps.sum(axis=1)
        else:
            out[:, j] = gaps @ weight_powers[j]
    return out

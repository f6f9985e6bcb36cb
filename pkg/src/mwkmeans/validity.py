"""Cluster validity indexes and per-index selection of the number of clusters.

Silhouette and Dunn accept any exponent p and use the p-th power Minkowski
distance (squared Euclidean at p = 2, Manhattan at p = 1), matching the
distance the clusterers minimize.  Calinski-Harabasz and the Hartigan rule
are squared-Euclidean by construction and consume the within-cluster sum
about recomputed cluster means regardless of how the clustering was
produced.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .metric import abs_power
from .partition import euclidean_wk

__all__ = [
    "KSelectionReport",
    "HARTIGAN_THRESHOLD",
    "silhouette",
    "dunn",
    "calinski_harabasz",
    "hartigan_select",
    "select_k",
]

HARTIGAN_THRESHOLD = 10.0

_BLOCK_ROWS = 256


@dataclass(frozen=True)
class KSelectionReport:
    """Per-k index values and the k they select.

    ``selection_rule`` is ``"maximize"`` for the ratio-style indexes and
    ``"hartigan_threshold"`` for the Hartigan rule (whose ``per_k_values``
    hold the HK trace).
    """

    index_name: str
    per_k_values: dict[int, float]
    selected_k: int
    selection_rule: str


def _values_of(data) -> np.ndarray:
    return data.values if hasattr(data, "values") else np.asarray(data, dtype=np.float64)


def _labels_of(clustering) -> np.ndarray:
    if hasattr(clustering, "assignments"):
        return clustering.assignments
    return np.asarray(clustering, dtype=np.int64)


# above this many entities, non-Euclidean pairwise blocks drop to float32
# (about 1e-7 relative error, immaterial for index comparisons and selection)
_SINGLE_PRECISION_N = 400


def _pairwise_block(A: np.ndarray, B: np.ndarray, p: float) -> np.ndarray:
    """All p-th power distances between rows of A and rows of B."""
    if p == 2.0:
        d = (
            (A * A).sum(axis=1)[:, None]
            - 2.0 * (A @ B.T)
            + (B * B).sum(axis=1)[None, :]
        )
        np.maximum(d, 0.0, out=d)
        return d
    if B.shape[0] > _SINGLE_PRECISION_N:
        A = A.astype(np.float32)
        B = B.astype(np.float32)
    out = np.zeros((A.shape[0], B.shape[0]), dtype=A.dtype)
    for v in range(A.shape[1]):
        out += abs_power(A[:, v, None] - B[None, :, v], p)
    return out


def _check_partition(labels: np.ndarray, n: int) -> tuple[int, np.ndarray]:
    k = int(labels.max()) + 1
    counts = np.bincount(labels, minlength=k)
    if k < 2:
        raise ValueError("need at least 2 clusters")
    if (counts == 0).any():
        raise ValueError("every cluster must be nonempty")
    if labels.shape[0] != n:
        raise ValueError("labels and data disagree on the number of entities")
    return k, counts


def silhouette(data, clustering, p: float) -> float:
    """Mean silhouette width under the p-th power Minkowski distance.

    For each entity, cohesion a is its average distance to the rest of its
    cluster and separation b the smallest average distance to another
    cluster; the silhouette is (b - a) / max(a, b).  Members of singleton
    clusters score 0 (cohesion is undefined there).
    """
    Y = _values_of(data)
    labels = _labels_of(clustering)
    n = Y.shape[0]
    k, counts = _check_partition(labels, n)

    membership = np.zeros((n, k))
    membership[np.arange(n), labels] = 1.0
    sums = np.empty((n, k))
    for start in range(0, n, _BLOCK_ROWS):
        stop = min(start + _BLOCK_ROWS, n)
        sums[start:stop] = _pairwise_block(Y[start:stop], Y, p) @ membership

    own = sums[np.arange(n), labels]
    own_count = counts[labels]
    a = np.where(own_count > 1, own / np.maximum(own_count - 1, 1), 0.0)

    means_other = sums / counts[None, :]
    means_other[np.arange(n), labels] = np.inf
    b = means_other.min(axis=1)

    denom = np.maximum(a, b)
    with np.errstate(invalid="ignore"):
        s = np.where(denom > 0, (b - a) / denom, 0.0)
    s = np.where(own_count == 1, 0.0, s)
    return float(s.mean())


def dunn(data, clustering, p: float) -> float:
    """Smallest between-cluster point distance over the largest cluster diameter.

    Both parts use point pairs: single linkage between clusters and the
    complete diameter within a cluster.  Undefined (raises) when every
    diameter is zero.
    """
    Y = _values_of(data)
    labels = _labels_of(clustering)
    n = Y.shape[0]
    _check_partition(labels, n)

    min_between = np.inf
    max_within = 0.0
    for start in range(0, n, _BLOCK_ROWS):
        stop = min(start + _BLOCK_ROWS, n)
        d = _pairwise_block(Y[start:stop], Y, p)
        same = labels[start:stop, None] == labels[None, :]
        if (~same).any():
            min_between = min(min_between, float(d[~same].min()))
        if same.any():
            max_within = max(max_within, float(d[same].max()))
    if max_within == 0.0:
        raise ValueError("all cluster diameters are zero; Dunn index undefined")
    return min_between / max_within


def calinski_harabasz(data, clustering) -> float:
    """Between/within variance-ratio index (squared Euclidean only)."""
    Y = _values_of(data)
    labels = _labels_of(clustering)
    n = Y.shape[0]
    k, _ = _check_partition(labels, n)
    if k > n - 1:
        raise ValueError(f"need k <= N-1, got k={k} with N={n}")
    w = euclidean_wk(Y, labels)
    if w == 0.0:
        raise ValueError("zero within-cluster scatter; index undefined")
    t = float(((Y - Y.mean(axis=0)) ** 2).sum())
    return ((t - w) / (k - 1)) / (w / (n - k))


def _hk_value(w_k: float, w_k1: float, n: int, k: int) -> float:
    if w_k1 == 0.0:
        ratio = 1.0 if w_k == 0.0 else np.inf
    else:
        ratio = w_k / w_k1
    return (ratio - 1.0) * (n - k - 1)


def hartigan_select(
    wk_trace: Mapping[int, float], n: int, k_range
) -> KSelectionReport:
    """Select k by the Hartigan rule from a trace of within-cluster sums.

    HK(k) = (W_k / W_{k+1} - 1)(N - k - 1); the selected k is the lowest
    one in ``k_range`` with HK <= 10.  If none qualifies, the k whose HK
    changes least to the next k is chosen.  The trace must cover every k
    in the range plus one more.
    """
    ks = sorted(set(int(k) for k in k_range))
    if not ks:
        raise ValueError("empty k range")
    missing = [k for k in ks if k not in wk_trace or (k + 1) not in wk_trace]
    if missing:
        raise ValueError(f"trace too short: need W at k and k+1 for k={missing}")

    hk = {
        k: float(_hk_value(wk_trace[k], wk_trace[k + 1], n, k))
        for k in sorted(wk_trace)
        if (k + 1) in wk_trace
    }
    for k in ks:
        if hk[k] <= HARTIGAN_THRESHOLD:
            return KSelectionReport("hartigan", hk, k, "hartigan_threshold")

    eligible = [k for k in ks if (k + 1) in hk]
    if not eligible:
        raise ValueError("trace too short for the fallback rule (need HK at k+1)")
    selected = min(eligible, key=lambda k: (abs(hk[k] - hk[k + 1]), k))
    return KSelectionReport("hartigan", hk, selected, "hartigan_threshold")


def select_k(
    per_k_values: Mapping[int, float], index_name: str = "", rule: str = "maximize"
) -> KSelectionReport:
    """Pick the k with the largest index value; ties go to the smallest k."""
    if rule != "maximize":
        raise ValueError(f"unknown selection rule {rule!r}")
    if not per_k_values:
        raise ValueError("no evaluated k values")
    values = {int(k): float(v) for k, v in per_k_values.items()}
    selected = None
    best = -np.inf
    for k in sorted(values):
        if values[k] > best:
            best = values[k]
            selected = k
    return KSelectionReport(index_name, values, selected, "maximize")

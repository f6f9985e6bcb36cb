"""Agreement metrics between partitions and k-estimation error."""

from __future__ import annotations

import numpy as np

__all__ = ["adjusted_rand", "relative_error"]


def _pairs(counts: np.ndarray):
    counts = counts.astype(np.int64)
    return (counts * (counts - 1) // 2).sum()


def adjusted_rand(labels_a, labels_b) -> float:
    """Chance-corrected agreement between two partitions of the same entities.

    1 for identical partitions (up to relabeling), about 0 for independent
    ones.  Symmetric in its arguments.  When both partitions are trivial
    the denominator vanishes; identical partitions score 1 by convention.
    """
    a = np.asarray(labels_a).ravel()
    b = np.asarray(labels_b).ravel()
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"length mismatch: {a.shape[0]} vs {b.shape[0]}")
    n = a.shape[0]
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    n_a = int(ai.max()) + 1
    n_b = int(bi.max()) + 1
    table = np.bincount(ai * n_b + bi, minlength=n_a * n_b).reshape(n_a, n_b)

    sum_cells = int(_pairs(table.ravel()))
    sum_a = int(_pairs(table.sum(axis=1)))
    sum_b = int(_pairs(table.sum(axis=0)))
    total = n * (n - 1) // 2

    expected = sum_a * sum_b / total if total else 0.0
    denominator = 0.5 * (sum_a + sum_b) - expected
    if denominator == 0.0:
        identical = np.count_nonzero(table) == max(n_a, n_b) and n_a == n_b
        return 1.0 if identical else 0.0
    return (sum_cells - expected) / denominator


def relative_error(true_k: int, est_k: int) -> float:
    """|true - estimated| / true, the scale-free k-estimation error."""
    if true_k < 1:
        raise ValueError("true_k must be >= 1")
    return abs(true_k - est_k) / true_k

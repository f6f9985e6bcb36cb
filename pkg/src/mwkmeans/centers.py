"""Minkowski centers: per-coordinate minimizers of sum_i |y_i - mu|^p.

For p = 2 the center is the mean and for p = 1 the median.  For other
p >= 1 the objective gamma(mu) = sum_i |y_i - mu|^p is convex (strictly for
p > 1) with its minimum inside [min(y), max(y)], so the solver bisects on
the sign of the derivative and then keeps the best of the bisection result
and the closed-form candidates.  The original fixed-step descent (start at
the mean, move by 0.001 toward decreasing gamma) is retained behind
``use_paper_stepping`` for fidelity experiments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .metric import abs_power

__all__ = [
    "CenterSolverConfig",
    "center_objective",
    "minkowski_center",
    "minkowski_center_columns",
    "batched_cluster_centers",
    "cluster_centroid",
]


@dataclass(frozen=True)
class CenterSolverConfig:
    """Tolerances for the per-coordinate center solver.

    ``paper_step`` is the fixed step size of the original descent scheme,
    used only when ``use_paper_stepping`` is set.
    """

    abs_tolerance: float = 1e-6
    paper_step: float = 0.001
    max_iterations: int = 10000
    use_paper_stepping: bool = False

    def __post_init__(self):
        if self.abs_tolerance <= 0:
            raise ValueError("abs_tolerance must be positive")
        if self.paper_step <= 0:
            raise ValueError("paper_step must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


DEFAULT_SOLVER = CenterSolverConfig()


def center_objective(values: np.ndarray, mu, p: float) -> np.ndarray:
    """gamma(mu) = sum_i |values_i - mu|^p, columnwise.

    ``values`` is (n,) or (n, V); ``mu`` is a scalar or length-V vector.
    """
    values = np.asarray(values, dtype=np.float64)
    return abs_power(values - mu, p).sum(axis=0)


def _derivative_sign_terms(X: np.ndarray, mu: np.ndarray, p: float) -> np.ndarray:
    # d/dmu sum_i |x_i - mu|^p, up to the positive factor p
    diff = mu - X
    return (np.sign(diff) * abs_power(diff, p - 1.0)).sum(axis=0)


def _bisect_columns(X: np.ndarray, p: float, cfg: CenterSolverConfig) -> np.ndarray:
    lo = X.min(axis=0)
    hi = X.max(axis=0)
    for _ in range(cfg.max_iterations):
        span = hi - lo
        if span.max() <= cfg.abs_tolerance:
            break
        mid = 0.5 * (lo + hi)
        g = _derivative_sign_terms(X, mid, p)
        right = g < 0.0
        lo = np.where(right, mid, lo)
        hi = np.where(right, hi, mid)
    return 0.5 * (lo + hi)


def _paper_step_columns(X: np.ndarray, p: float, cfg: CenterSolverConfig) -> np.ndarray:
    mu = X.mean(axis=0)
    best = center_objective(X, mu, p)
    step = cfg.paper_step
    for _ in range(cfg.max_iterations):
        up = center_objective(X, mu + step, p)
        down = center_objective(X, mu - step, p)
        move_up = (up < best) & (up <= down)
        move_down = (down < best) & ~move_up
        if not (move_up.any() or move_down.any()):
            break
        mu = np.where(move_up, mu + step, np.where(move_down, mu - step, mu))
        best = np.where(move_up, up, np.where(move_down, down, best))
    return mu


def minkowski_center_columns(
    X: np.ndarray,
    p: float,
    cfg: CenterSolverConfig = DEFAULT_SOLVER,
    incumbent: np.ndarray | None = None,
) -> np.ndarray:
    """Minkowski center of every column of an (n, V) matrix at once.

    ``incumbent`` (an optional length-V vector, e.g. the previous centroid)
    joins the candidate set, which guarantees the returned center never has
    a worse objective than the incumbent.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("need a nonempty 2-D matrix of member rows")
    if p < 1.0:
        raise ValueError(f"p must be >= 1, got {p}")
    if p == 2.0 and not cfg.use_paper_stepping:
        return X.mean(axis=0)
    if p == 1.0 and not cfg.use_paper_stepping:
        return np.median(X, axis=0)

    if cfg.use_paper_stepping:
        # fidelity mode reproduces the fixed-step scheme as-is, no polishing
        return _paper_step_columns(X, p, cfg)

    searched = _bisect_columns(X, p, cfg)
    candidates = [searched, X.mean(axis=0), np.median(X, axis=0)]
    if incumbent is not None:
        candidates.append(np.asarray(incumbent, dtype=np.float64))
    stacked = np.stack(candidates)  # (n_cand, V)
    objectives = np.stack([center_objective(X, c, p) for c in stacked])
    return stacked[objectives.argmin(axis=0), np.arange(X.shape[1])]


def batched_cluster_centers(
    Y: np.ndarray,
    membership: np.ndarray,
    labels: np.ndarray,
    p: float,
    cfg: CenterSolverConfig,
    incumbents: np.ndarray,
    skip: frozenset[int] | set[int] = frozenset(),
) -> np.ndarray:
    """Minkowski centers of all clusters at once (engine fast path).

    ``membership`` is the N x K one-hot cluster matrix matching ``labels``.
    Solves every (cluster, feature) coordinate simultaneously: the
    bisection runs on a K x V state with the per-cluster derivative sums
    collected by one matmul per step.  Empty clusters and indices in
    ``skip`` keep their incumbent row; incumbents also join the candidate
    polish, so no cluster objective ever moves above its incumbent's.
    """
    k = membership.shape[1]
    counts = membership.sum(axis=0)
    out = np.array(incumbents, dtype=np.float64)
    active = np.array([j not in skip and counts[j] > 0 for j in range(k)])
    if not active.any():
        return out

    if p == 2.0 and not cfg.use_paper_stepping:
        sums = membership.T @ Y
        means = sums / np.maximum(counts, 1.0)[:, None]
        out[active] = means[active]
        return out

    def segment_objective(cand):
        return membership.T @ abs_power(Y - cand[labels], p)

    if p == 1.0 and not cfg.use_paper_stepping:
        for j in range(k):
            if active[j]:
                out[j] = np.median(Y[labels == j], axis=0)
        return out

    if cfg.use_paper_stepping:
        for j in range(k):
            if active[j]:
                out[j] = _paper_step_columns(Y[labels == j], p, cfg)
        return out

    lo = np.tile(Y.min(axis=0), (k, 1))
    hi = np.tile(Y.max(axis=0), (k, 1))
    span = float((hi[0] - lo[0]).max())
    steps = max(1, int(np.ceil(np.log2(max(span, cfg.abs_tolerance) / cfg.abs_tolerance))) + 1)
    for _ in range(min(steps, cfg.max_iterations)):
        mid = 0.5 * (lo + hi)
        diff = mid[labels] - Y
        g = membership.T @ (np.sign(diff) * abs_power(diff, p - 1.0))
        right = g < 0.0
        lo = np.where(right, mid, lo)
        hi = np.where(right, hi, mid)
    searched = 0.5 * (lo + hi)

    means = (membership.T @ Y) / np.maximum(counts, 1.0)[:, None]
    medians = np.array(incumbents, dtype=np.float64)
    for j in range(k):
        if active[j]:
            medians[j] = np.median(Y[labels == j], axis=0)
    candidates = np.stack([searched, means, medians, np.asarray(incumbents, dtype=np.float64)])
    objectives = np.stack([segment_objective(c) for c in candidates])
    choice = objectives.argmin(axis=0)
    best = np.take_along_axis(candidates, choice[None, :, :], axis=0)[0]
    out[active] = best[active]
    return out


def minkowski_center(values, p: float, cfg: CenterSolverConfig = DEFAULT_SOLVER) -> float:
    """Scalar Minkowski center of a nonempty list of values."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1 or values.size == 0:
        raise ValueError("values must be a nonempty 1-D array")
    if not np.isfinite(values).all():
        raise ValueError("values must be finite")
    return float(minkowski_center_columns(values[:, None], p, cfg)[0])


def cluster_centroid(data, members, p: float, cfg: CenterSolverConfig = DEFAULT_SOLVER) -> np.ndarray:
    """Per-feature Minkowski center over the given member rows of a data matrix."""
    values = data.values if hasattr(data, "values") else np.asarray(data, dtype=np.float64)
    members = np.asarray(members)
    if members.size == 0:
        raise ValueError("member set must be nonempty")
    return minkowski_center_columns(values[members], p, cfg)

"""Synthetic benchmark generator: Gaussian (or heavy-tailed) clusters plus noise.

A scenario draws k centroids with independent standard-normal components,
assigns each entity to a cluster by the proportion vector, and scatters
entities around their centroid with variance 0.5 per informative feature
(optionally with a common positive covariance between features, or with
t3 tails for outlier studies).  Noise features carry no cluster signal:
uniform values over the global range of the informative columns (t3 noise
around the midpoint of that range in the heavy-tailed family).
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .dataset import DataMatrix

__all__ = ["ScenarioSpec", "generate", "write_dataset", "read_sidecar"]

_SEED_MASK = (1 << 64) - 1

FAMILIES = ("gaussian", "student_t3")


@dataclass(frozen=True)
class ScenarioSpec:
    """Parameters of one synthetic data configuration.

    ``noise_fraction`` adds ``round(noise_fraction * n_informative)``
    noise features.  ``cluster_proportions`` defaults to uniform 1/k.
    ``correlation`` (gaussian family only) is the common covariance
    between every pair of informative features within a cluster.
    """

    n_entities: int = 1000
    n_informative: int = 12
    k_true: int = 3
    noise_fraction: float = 0.0
    family: str = "gaussian"
    cluster_proportions: tuple[float, ...] | None = None
    correlation: float = 0.0
    sigma2: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.n_entities < 2:
            raise ValueError("need at least 2 entities")
        if self.n_informative < 1:
            raise ValueError("need at least 1 informative feature")
        if self.k_true < 1:
            raise ValueError("k_true must be >= 1")
        if self.noise_fraction < 0:
            raise ValueError("noise_fraction must be >= 0")
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if self.sigma2 <= 0:
            raise ValueError("sigma2 must be positive")
        if self.correlation < 0 or self.correlation >= self.sigma2:
            raise ValueError("correlation must lie in [0, sigma2)")
        if self.correlation > 0 and self.family != "gaussian":
            raise ValueError("correlated features are only defined for the gaussian family")
        if self.cluster_proportions is not None:
            props = tuple(float(x) for x in self.cluster_proportions)
            if len(props) != self.k_true:
                raise ValueError("cluster_proportions must have k_true entries")
            if min(props) <= 0 or abs(sum(props) - 1.0) > 1e-9:
                raise ValueError("cluster_proportions must be positive and sum to 1")
            object.__setattr__(self, "cluster_proportions", props)

    @property
    def n_noise(self) -> int:
        return int(round(self.noise_fraction * self.n_informative))

    @property
    def n_features(self) -> int:
        return self.n_informative + self.n_noise

    @property
    def proportions(self) -> np.ndarray:
        if self.cluster_proportions is None:
            return np.full(self.k_true, 1.0 / self.k_true)
        return np.array(self.cluster_proportions)

    @property
    def name(self) -> str:
        base = f"{self.n_entities}x{self.n_informative}-{self.k_true}"
        if self.n_noise:
            base += f"+{self.n_noise}NF"
        if self.family == "student_t3":
            base += "-t3"
        if self.correlation > 0:
            base += "-corr"
        return base


def generate(spec: ScenarioSpec) -> tuple[DataMatrix, np.ndarray]:
    """Draw one raw (unstandardized) data set and its ground-truth labels."""
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed & _SEED_MASK))
    n, m, k = spec.n_entities, spec.n_informative, spec.k_true
    scale = np.sqrt(spec.sigma2)

    centroids = rng.standard_normal((k, m))
    labels = rng.choice(k, size=n, p=spec.proportions)

    if spec.family == "gaussian":
        if spec.correlation > 0:
            # compound symmetry: shared factor + independent remainder
            shared = rng.standard_normal(n) * np.sqrt(spec.correlation)
            rest = rng.standard_normal((n, m)) * np.sqrt(spec.sigma2 - spec.correlation)
            informative = centroids[labels] + shared[:, None] + rest
        else:
            informative = centroids[labels] + rng.standard_normal((n, m)) * scale
    else:
        informative = centroids[labels] + rng.standard_t(3, size=(n, m)) * scale

    if spec.n_noise:
        lo = float(informative.min())
        hi = float(informative.max())
        if spec.family == "gaussian":
            noise = rng.uniform(lo, hi, size=(n, spec.n_noise))
        else:
            mid = 0.5 * (lo + hi)
            noise = mid + rng.standard_t(3, size=(n, spec.n_noise)) * scale
        values = np.hstack([informative, noise])
    else:
        values = informative

    return DataMatrix(values), labels.astype(np.int64)


def write_dataset(out_dir, stem: str, data: DataMatrix, labels: np.ndarray, spec: ScenarioSpec) -> Path:
    """Write one replicate as CSV (features + label column) plus a JSON sidecar."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{stem}.csv"
    with open(csv_path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(",".join([f"f{j}" for j in range(data.n_features)] + ["label"]) + "\n")
        for row, lab in zip(data.values, labels):
            fh.write(",".join([repr(float(x)) for x in row] + [str(int(lab))]) + "\n")
    sidecar = out_dir / f"{stem}.json"
    with open(sidecar, "w", encoding="utf-8") as fh:
        json.dump(asdict(spec), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return csv_path


def read_sidecar(path) -> ScenarioSpec:
    """Load a ScenarioSpec back from its JSON sidecar."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if raw.get("cluster_proportions") is not None:
        raw["cluster_proportions"] = tuple(raw["cluster_proportions"])
    return ScenarioSpec(**raw)

"""Minkowski weighted k-means toolkit.

Partitional clustering with per-cluster feature weights under the p-th
power Minkowski distance, anomalous-pattern initialization, a cluster
validity index suite for estimating the number of clusters, explicit
feature re-scaling pipelines, and a synthetic-benchmark experiment
harness.
"""

from .anomalous import AnomalousInit, extract_anomalous, imwk_means, k_search_cap, truncate_to_k
from .centers import CenterSolverConfig, center_objective, cluster_centroid, minkowski_center
from .datagen import ScenarioSpec, generate, write_dataset
from .dataset import (
    DataError,
    DataMatrix,
    ensure_standardized,
    load_csv,
    read_csv,
    standardize_range,
    write_csv,
)
from .evaluate import adjusted_rand, relative_error
from .harness import (
    INDEXES,
    METHODS,
    PAPER_P_GRID,
    ExperimentConfig,
    ExperimentRecord,
    aggregate_records,
    run_experiment,
)
from .metric import (
    P_NEAR_ONE,
    MinkowskiConfig,
    WeightMatrix,
    effective_p,
    minkowski_p,
    weighted_minkowski_p,
)
from .mwk import DispersionTable, dispersions, mwk_means, mwk_multistart, update_weights
from .partition import (
    Clustering,
    ConvergenceError,
    RestartPolicy,
    criterion,
    euclidean_wk,
    kmeans,
    kmeans_multistart,
)
from .rescale import (
    PipelineEntry,
    RescaledView,
    pipeline_imwk,
    pipeline_imwk_rescaled,
    pipeline_rescale_kmeans,
    rescale_view,
)
from .validity import (
    KSelectionReport,
    calinski_harabasz,
    dunn,
    hartigan_select,
    select_k,
    silhouette,
)

__version__ = "0.1.0"

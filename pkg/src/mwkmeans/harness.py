"""Experiment harness: scenarios x methods x exponents x validity indexes.

For every scenario replicate the harness generates data, standardizes it,
runs the requested methods over their k search ranges, lets each validity
index pick a k, and records the estimation error, the agreement of the
chosen clustering with the ground truth, and whether the true k was hit.
Everything is driven by seeds derived from the master seed with a stable
hash, so results are reproducible bit for bit and independent of worker
scheduling.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .anomalous import extract_anomalous, k_search_cap
from .datagen import ScenarioSpec, generate
from .dataset import standardize_range
from .evaluate import adjusted_rand, relative_error
from .metric import P_NEAR_ONE, effective_p
from .partition import ConvergenceError, RestartPolicy, euclidean_wk, kmeans_multistart
from .rescale import PipelineEntry, pipeline_imwk, pipeline_imwk_rescaled, pipeline_rescale_kmeans
from .seeding import stable_seed
from .validity import calinski_harabasz, dunn, hartigan_select, select_k, silhouette

__all__ = [
    "METHODS",
    "INDEXES",
    "PAPER_P_GRID",
    "ExperimentConfig",
    "ExperimentRecord",
    "run_experiment",
    "aggregate_records",
    "write_outputs",
]

METHODS = ("baseline_kmeans", "imwk", "imwk_rescaled", "imwk_rescaled_kmeans")
INDEXES = ("sil_eucl", "sil_manh", "sil_mink", "dunn_eucl", "dunn_mink", "ch", "hartigan")
PAPER_P_GRID = (P_NEAR_ONE, 1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8, 1.9, 2.0, 2.5, 3.0)


@dataclass(frozen=True)
class ExperimentConfig:
    """What to run: scenarios, methods, exponent grid, indexes, protocol knobs."""

    scenarios: tuple[ScenarioSpec, ...]
    replicates: int = 1
    methods: tuple[str, ...] = ("baseline_kmeans",)
    p_grid: tuple[float, ...] = PAPER_P_GRID
    indexes: tuple[str, ...] = INDEXES
    k_min: int = 2
    k_max: int = 20
    restarts: int = 100
    master_seed: int = 0

    def __post_init__(self):
        if not self.scenarios:
            raise ValueError("need at least one scenario")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.k_min < 2:
            raise ValueError("k_min must be >= 2")
        if self.k_max < self.k_min:
            raise ValueError("k_max must be >= k_min")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ValueError(f"unknown methods {bad}; choose from {METHODS}")
        bad = [i for i in self.indexes if i not in INDEXES]
        if bad:
            raise ValueError(f"unknown indexes {bad}; choose from {INDEXES}")
        for p in self.p_grid:
            if p < 1.0:
                raise ValueError(f"p grid entries must be >= 1, got {p}")


@dataclass
class ExperimentRecord:
    """One (scenario, replicate, method, p, index) outcome."""

    scenario: str
    replicate: int
    method: str
    p: float | None
    index: str
    selected_k: int | None
    true_k: int
    relative_error: float | None
    ari: float | None
    hit: bool | None
    failed: bool = False
    error: str | None = None
    wall_time: float = 0.0

    def sort_key(self):
        return (self.scenario, self.replicate, self.method,
                -1.0 if self.p is None else self.p, self.index)

    def to_json_dict(self) -> dict:
        # wall_time is deliberately left out: it varies run to run and the
        # records file is guaranteed byte-identical for a given master seed
        return {
            "scenario": self.scenario,
            "replicate": self.replicate,
            "method": self.method,
            "p": self.p,
            "index": self.index,
            "selected_k": self.selected_k,
            "true_k": self.true_k,
            "relative_error": self.relative_error,
            "ari": self.ari,
            "hit": self.hit,
            "failed": self.failed,
            "error": self.error,
        }


def _index_values(entries: list[PipelineEntry], index: str, mink_p: float, cache: dict):
    """Per-k values of one index over the pipeline entries (Hartigan excluded)."""
    if index in ("sil_eucl", "sil_manh", "sil_mink"):
        p = {"sil_eucl": 2.0, "sil_manh": 1.0, "sil_mink": mink_p}[index]
        key = ("sil", p)
        if key not in cache:
            cache[key] = {
                e.k: silhouette(e.cvi_data, e.clustering, p) for e in entries
            }
        return cache[key]
    if index in ("dunn_eucl", "dunn_mink"):
        p = 2.0 if index == "dunn_eucl" else mink_p
        key = ("dunn", p)
        if key not in cache:
            cache[key] = {e.k: dunn(e.cvi_data, e.clustering, p) for e in entries}
        return cache[key]
    if index == "ch":
        if "ch" not in cache:
            cache["ch"] = {
                e.k: calinski_harabasz(e.cvi_data, e.clustering) for e in entries
            }
        return cache["ch"]
    raise ValueError(f"unknown index {index!r}")


def _select_per_index(entries, indexes, mink_p, n_entities):
    """Run each requested index over the entries; returns index -> report or error."""
    out = {}
    cache: dict = {}
    for index in indexes:
        try:
            if index == "hartigan":
                key = "wk_trace"
                if key not in cache:
                    cache[key] = {
                        e.k: euclidean_wk(e.cvi_data, e.clustering) for e in entries
                    }
                trace = cache[key]
                selectable = [k for k in sorted(trace) if k + 1 in trace]
                if not selectable:
                    raise ValueError("k range too small for the Hartigan rule")
                out[index] = hartigan_select(trace, n_entities, selectable)
            else:
                values = _index_values(entries, index, mink_p, cache)
                out[index] = select_k(values, index_name=index)
        except (ValueError, ConvergenceError, FloatingPointError) as exc:
            out[index] = exc
    return out


def _records_for_cell(scenario_name, rep, method, p, indexes, selections,
                      entries_by_k, truth, true_k, wall_time):
    records = []
    for index in indexes:
        outcome = selections.get(index)
        if isinstance(outcome, Exception) or outcome is None:
            records.append(ExperimentRecord(
                scenario_name, rep, method, p, index, None, true_k,
                None, None, None, failed=True,
                error=str(outcome) if outcome is not None else "not evaluated",
                wall_time=wall_time,
            ))
            continue
        chosen = entries_by_k[outcome.selected_k]
        ari = adjusted_rand(truth, chosen.clustering.assignments)
        re_val = relative_error(true_k, outcome.selected_k)
        records.append(ExperimentRecord(
            scenario_name, rep, method, p, index, outcome.selected_k, true_k,
            re_val, float(ari), bool(outcome.selected_k == true_k),
            wall_time=wall_time,
        ))
    return records


def _failure_records(scenario_name, rep, method, p, indexes, true_k, message, wall_time=0.0):
    return [
        ExperimentRecord(scenario_name, rep, method, p, index, None, true_k,
                         None, None, None, failed=True, error=message,
                         wall_time=wall_time)
        for index in indexes
    ]


def _run_baseline(cfg, scenario, rep, data, truth):
    """Multi-restart squared-Euclidean k-means over [k_min, k_max].

    The Manhattan-silhouette column is aligned with its own clusterer and
    runs k-medians (p = 1) instead; Minkowski-index columns use p = 2 so
    they coincide with the Euclidean ones.
    """
    name = scenario.name
    start = time.perf_counter()
    ks = range(cfg.k_min, cfg.k_max + 1)
    euclid_indexes = tuple(i for i in cfg.indexes if i != "sil_manh")
    records = []

    def multistart_entries(p, tag):
        entries = []
        for k in ks:
            policy = RestartPolicy(
                cfg.restarts, stable_seed(cfg.master_seed, name, rep, "baseline_kmeans", tag, k)
            )
            c = kmeans_multistart(data, k, p, policy)
            entries.append(PipelineEntry(k, c, data, c.centroids))
        return entries

    try:
        if euclid_indexes:
            entries = multistart_entries(2.0, "p2")
            selections = _select_per_index(entries, euclid_indexes, 2.0, data.n_entities)
            wall = time.perf_counter() - start
            records += _records_for_cell(name, rep, "baseline_kmeans", None,
                                         euclid_indexes, selections,
                                         {e.k: e for e in entries},
                                         truth, scenario.k_true, wall)
        if "sil_manh" in cfg.indexes:
            manh_start = time.perf_counter()
            entries_m = multistart_entries(1.0, "p1")
            manh = _select_per_index(entries_m, ("sil_manh",), 1.0, data.n_entities)
            wall = time.perf_counter() - manh_start
            records += _records_for_cell(name, rep, "baseline_kmeans", None,
                                         ("sil_manh",), manh,
                                         {e.k: e for e in entries_m},
                                         truth, scenario.k_true, wall)
    except (ValueError, ConvergenceError, FloatingPointError) as exc:
        wall = time.perf_counter() - start
        done = {r.index for r in records}
        missing = tuple(i for i in cfg.indexes if i not in done)
        records += _failure_records(name, rep, "baseline_kmeans", None, missing,
                                    scenario.k_true, str(exc), wall)
    return records


def _run_imwk_family(cfg, scenario, rep, data, truth, p, methods):
    """All weighted-initialization methods at one exponent, sharing extraction."""
    name = scenario.name
    p_eff = effective_p(p, weighted=True)
    records = []
    start = time.perf_counter()
    try:
        init = extract_anomalous(data, p_eff, theta=1, weighted=True)
        cap = k_search_cap(init, cfg.k_max)
    except (ValueError, ConvergenceError) as exc:
        wall = time.perf_counter() - start
        for method in methods:
            records += _failure_records(name, rep, method, p, cfg.indexes,
                                        scenario.k_true, str(exc), wall)
        return records

    k_range = range(cfg.k_min, cap + 1)
    base_entries: list[PipelineEntry] | None = None
    base_error: Exception | None = None
    try:
        base_entries = pipeline_imwk(data, k_range, p_eff, init=init)
    except (ValueError, ConvergenceError, FloatingPointError) as exc:
        base_error = exc

    for method in methods:
        cell_start = time.perf_counter()
        if base_error is not None:
            records += _failure_records(name, rep, method, p, cfg.indexes,
                                        scenario.k_true, str(base_error))
            continue
        try:
            if method == "imwk":
                entries = base_entries
            elif method == "imwk_rescaled":
                entries = pipeline_imwk_rescaled(data, k_range, p_eff, base=base_entries)
            elif method == "imwk_rescaled_kmeans":
                policy = RestartPolicy(
                    cfg.restarts,
                    stable_seed(cfg.master_seed, name, rep, method, repr(p)),
                )
                entries = pipeline_rescale_kmeans(data, k_range, p_eff, policy,
                                                  base=base_entries)
            else:
                raise ValueError(f"unknown method {method!r}")
            selections = _select_per_index(entries, cfg.indexes, p_eff, data.n_entities)
            wall = time.perf_counter() - cell_start
            records += _records_for_cell(name, rep, method, p, cfg.indexes,
                                         selections, {e.k: e for e in entries},
                                         truth, scenario.k_true, wall)
        except (ValueError, ConvergenceError, FloatingPointError) as exc:
            wall = time.perf_counter() - cell_start
            records += _failure_records(name, rep, method, p, cfg.indexes,
                                        scenario.k_true, str(exc), wall)
    return records


def _run_replicate(cfg: ExperimentConfig, scenario: ScenarioSpec, rep: int):
    data_seed = stable_seed(cfg.master_seed, "data", scenario.name, rep)
    raw, truth = generate(replace(scenario, seed=data_seed))
    data = standardize_range(raw)

    records = []
    if "baseline_kmeans" in cfg.methods:
        records += _run_baseline(cfg, scenario, rep, data, truth)
    imwk_methods = tuple(m for m in cfg.methods if m != "baseline_kmeans")
    if imwk_methods:
        for p in cfg.p_grid:
            records += _run_imwk_family(cfg, scenario, rep, data, truth, p, imwk_methods)
    return records


def _replicate_worker(args):
    cfg, scenario_index, rep = args
    return _run_replicate(cfg, cfg.scenarios[scenario_index], rep)


def run_experiment(cfg: ExperimentConfig, out_dir=None, n_jobs: int | None = None):
    """Run the full grid; returns (records, aggregates).

    Replicates execute in parallel processes when ``n_jobs`` allows; the
    output is independent of scheduling.  When ``out_dir`` is given, writes
    records.ndjson, timings.csv and per-scenario aggregate tables.
    """
    tasks = [
        (cfg, si, rep)
        for si in range(len(cfg.scenarios))
        for rep in range(cfg.replicates)
    ]
    if n_jobs is None:
        n_jobs = min(len(tasks), os.cpu_count() or 1)
    if n_jobs <= 1 or len(tasks) == 1:
        chunks = [_replicate_worker(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            chunks = list(pool.map(_replicate_worker, tasks))
    records = [r for chunk in chunks for r in chunk]
    records.sort(key=ExperimentRecord.sort_key)
    aggregates = aggregate_records(records)
    if out_dir is not None:
        write_outputs(records, aggregates, out_dir, indexes=cfg.indexes)
    return records, aggregates


def _mean_se(values):
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        return None, None
    mean = float(arr.mean())
    se = float(arr.std(ddof=1) / np.sqrt(arr.size)) if arr.size > 1 else 0.0
    return mean, se


def aggregate_records(records):
    """Group records into per-(scenario, method, p, index) summary statistics."""
    groups: dict = {}
    for r in records:
        cell = groups.setdefault(r.scenario, {}).setdefault((r.method, r.p), {})
        cell.setdefault(r.index, []).append(r)
    aggregates: dict = {}
    for scenario, rows in groups.items():
        aggregates[scenario] = {}
        for row_key, by_index in rows.items():
            agg_row = {}
            for index, recs in by_index.items():
                ok = [r for r in recs if not r.failed]
                mean_re, se_re = _mean_se([r.relative_error for r in ok])
                mean_ari, se_ari = _mean_se([r.ari for r in ok])
                hits = [r.hit for r in ok]
                agg_row[index] = {
                    "n": len(recs),
                    "failures": len(recs) - len(ok),
                    "mean_re": mean_re,
                    "se_re": se_re,
                    "mean_ari": mean_ari,
                    "se_ari": se_ari,
                    "hit_rate": float(np.mean(hits)) if hits else None,
                }
            aggregates[scenario][row_key] = agg_row
    return aggregates


def _row_label(method, p):
    if method == "baseline_kmeans":
        return ("K-Means", "")
    if p is not None and abs(p - P_NEAR_ONE) < 1e-12:
        return (method, "p->1")
    return (method, f"p={p:g}")


def _format_cell(stats, metric):
    if stats is None:
        return ""
    if stats["n"] == stats["failures"]:
        return "failed"
    if metric == "hit":
        return f"{100.0 * stats['hit_rate']:.3f}"
    mean = stats[f"mean_{metric}"]
    se = stats[f"se_{metric}"]
    return f"{mean:.3f}/{se:.3f}"


def _sorted_rows(rows):
    def key(row_key):
        method, p = row_key
        return (METHODS.index(method), -1.0 if p is None else p)

    return sorted(rows, key=key)


def write_outputs(records, aggregates, out_dir, indexes=INDEXES):
    """Write records.ndjson, timings.csv and aggregate tables (CSV + Markdown)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    with open(out_dir / "records.ndjson", "w", encoding="utf-8", newline="\n") as fh:
        for r in records:
            fh.write(json.dumps(r.to_json_dict()) + "\n")

    with open(out_dir / "timings.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("scenario,replicate,method,p,index,seconds\n")
        for r in records:
            p_txt = "" if r.p is None else repr(r.p)
            fh.write(f"{r.scenario},{r.replicate},{r.method},{p_txt},{r.index},{r.wall_time:.3f}\n")

    tables_dir = out_dir / "tables"
    tables_dir.mkdir(exist_ok=True)
    for scenario, rows in aggregates.items():
        for metric in ("re", "ari", "hit"):
            header = ["method", "p"] + list(indexes)
            lines_csv = [",".join(header)]
            lines_md = ["| " + " | ".join(header) + " |",
                        "|" + "|".join(["---"] * len(header)) + "|"]
            for row_key in _sorted_rows(rows):
                method_label, p_label = _row_label(*row_key)
                cells = [
                    _format_cell(rows[row_key].get(index), metric) for index in indexes
                ]
                lines_csv.append(",".join([method_label, p_label] + cells))
                lines_md.append("| " + " | ".join([method_label, p_label] + cells) + " |")
            stem = f"{scenario}_{metric}"
            (tables_dir / f"{stem}.csv").write_text("\n".join(lines_csv) + "\n", encoding="utf-8")
            (tables_dir / f"{stem}.md").write_text("\n".join(lines_md) + "\n", encoding="utf-8")

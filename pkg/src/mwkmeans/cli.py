"""Command-line interface.

Subcommands:

* ``generate``    synthetic data sets from a scenario JSON spec
* ``cluster``     run one clusterer on a CSV file
* ``estimate-k``  pick the number of clusters with one method and index
* ``evaluate``    compare a stored clustering against ground-truth labels
* ``experiment``  run a full scenario/method/index grid

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .anomalous import extract_anomalous, imwk_means, k_search_cap
from .datagen import ScenarioSpec, generate, write_dataset
from .dataset import DataError, ensure_standardized, load_csv
from .evaluate import adjusted_rand
from .harness import INDEXES, METHODS, ExperimentConfig, run_experiment
from .metric import effective_p
from .mwk import mwk_multistart
from .partition import ConvergenceError, RestartPolicy, kmeans_multistart
from .rescale import pipeline_imwk, pipeline_imwk_rescaled, pipeline_rescale_kmeans
from .harness import _select_per_index  # shared index-selection logic
from .seeding import stable_seed

EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mwkmeans", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="generate synthetic data sets")
    gen.add_argument("--spec", required=True, help="scenario spec JSON file")
    gen.add_argument("--out", required=True, help="output directory")

    clu = sub.add_parser("cluster", help="cluster a CSV file")
    clu.add_argument("--in", dest="infile", required=True)
    clu.add_argument("--method", required=True, choices=["kmeans", "kmedians", "mwk", "imwk"])
    clu.add_argument("--k", type=int, required=True)
    clu.add_argument("--p", type=float, default=2.0)
    clu.add_argument("--restarts", type=int, default=100)
    clu.add_argument("--seed", type=int, default=0)
    clu.add_argument("--out", required=True)

    est = sub.add_parser("estimate-k", help="estimate the number of clusters")
    est.add_argument("--in", dest="infile", required=True)
    est.add_argument("--method", required=True, choices=list(METHODS))
    est.add_argument("--p", type=float, default=2.0)
    est.add_argument("--index", required=True, choices=list(INDEXES))
    est.add_argument("--kmax", type=int, default=20)
    est.add_argument("--restarts", type=int, default=100)
    est.add_argument("--seed", type=int, default=0)
    est.add_argument("--out", required=True)

    ev = sub.add_parser("evaluate", help="score a clustering against labels")
    ev.add_argument("--clustering", required=True)
    ev.add_argument("--labels", required=True, help="CSV with a label column")
    ev.add_argument("--out", required=True)

    exp = sub.add_parser("experiment", help="run an experiment grid")
    exp.add_argument("--config", required=True)
    exp.add_argument("--out", required=True)
    exp.add_argument("--jobs", type=int, default=None)
    return parser


def _cmd_generate(args) -> int:
    with open(args.spec, encoding="utf-8") as fh:
        raw = json.load(fh)
    replicates = int(raw.pop("replicates", 1))
    if raw.get("cluster_proportions") is not None:
        raw["cluster_proportions"] = tuple(raw["cluster_proportions"])
    spec = ScenarioSpec(**raw)
    for rep in range(replicates):
        rep_spec = replace(spec, seed=stable_seed(spec.seed, "replicate", rep))
        data, labels = generate(rep_spec)
        write_dataset(args.out, f"{spec.name}_rep{rep}", data, labels, rep_spec)
    print(f"wrote {replicates} replicate(s) of {spec.name} to {args.out}")
    return 0


def _cmd_cluster(args) -> int:
    data, _ = load_csv(args.infile)
    data = ensure_standardized(data)
    p = args.p
    policy = RestartPolicy(args.restarts, args.seed)
    if args.method == "kmeans":
        result = kmeans_multistart(data, args.k, p, policy)
    elif args.method == "kmedians":
        result = kmeans_multistart(data, args.k, 1.0, policy)
        p = 1.0
    elif args.method == "mwk":
        p = effective_p(p, weighted=True)
        result = mwk_multistart(data, args.k, p, policy)
    else:
        p = effective_p(p, weighted=True)
        result = imwk_means(data, args.k, p)
    payload = {
        "assignments": result.assignments.tolist(),
        "centroids": result.centroids.tolist(),
        "weights": None if result.weights is None else result.weights.weights.tolist(),
        "criterion": result.criterion_value,
        "k": result.k,
        "p": p,
        "method": args.method,
        "seed": args.seed,
    }
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
        fh.write("\n")
    print(f"{args.method} k={args.k}: criterion {result.criterion_value:.6g}")
    return 0


def _cmd_estimate_k(args) -> int:
    data, _ = load_csv(args.infile)
    data = ensure_standardized(data)
    from .rescale import PipelineEntry

    if args.method == "baseline_kmeans":
        clusterer_p = 1.0 if args.index == "sil_manh" else 2.0
        entries = []
        for k in range(2, args.kmax + 1):
            policy = RestartPolicy(args.restarts, stable_seed(args.seed, "estimate", k))
            c = kmeans_multistart(data, k, clusterer_p, policy)
            entries.append(PipelineEntry(k, c, data, c.centroids))
        mink_p = 2.0
    else:
        p = effective_p(args.p, weighted=True)
        init = extract_anomalous(data, p, theta=1, weighted=True)
        cap = k_search_cap(init, args.kmax)
        k_range = range(2, cap + 1)
        if args.method == "imwk":
            entries = pipeline_imwk(data, k_range, p, init=init)
        elif args.method == "imwk_rescaled":
            entries = pipeline_imwk_rescaled(data, k_range, p, init=init)
        else:
            policy = RestartPolicy(args.restarts, args.seed)
            entries = pipeline_rescale_kmeans(data, k_range, p, policy, init=init)
        mink_p = p
    selections = _select_per_index(entries, (args.index,), mink_p, data.n_entities)
    outcome = selections[args.index]
    if isinstance(outcome, Exception):
        raise ValueError(str(outcome))
    report = {
        "method": args.method,
        "index": args.index,
        "p": mink_p,
        "k_values": {str(k): v for k, v in sorted(outcome.per_k_values.items())},
        "selection_rule": outcome.selection_rule,
        "selected_k": outcome.selected_k,
    }
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")
    print(f"{args.index} selects k={outcome.selected_k}")
    return 0


def _cmd_evaluate(args) -> int:
    with open(args.clustering, encoding="utf-8") as fh:
        clustering = json.load(fh)
    assignments = np.asarray(clustering["assignments"], dtype=np.int64)
    _, labels = load_csv(args.labels)
    if labels is None:
        raise DataError(f"{args.labels}: no label column found")
    if labels.shape[0] != assignments.shape[0]:
        raise DataError("clustering and labels disagree on the number of entities")
    metrics = {
        "ari": adjusted_rand(labels, assignments),
        "k": int(clustering["k"]),
        "n_entities": int(assignments.shape[0]),
    }
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(metrics, fh, indent=2)
        fh.write("\n")
    print(f"ARI {metrics['ari']:.6f}")
    return 0


def _cmd_experiment(args) -> int:
    with open(args.config, encoding="utf-8") as fh:
        raw = json.load(fh)
    scenarios = []
    for s in raw.pop("scenarios"):
        if s.get("cluster_proportions") is not None:
            s["cluster_proportions"] = tuple(s["cluster_proportions"])
        scenarios.append(ScenarioSpec(**s))
    for key in ("methods", "p_grid", "indexes"):
        if key in raw:
            raw[key] = tuple(raw[key])
    cfg = ExperimentConfig(scenarios=tuple(scenarios), **raw)
    records, _ = run_experiment(cfg, out_dir=args.out, n_jobs=args.jobs)
    n_failed = sum(r.failed for r in records)
    print(f"wrote {len(records)} records ({n_failed} failed) to {Path(args.out) / 'records.ndjson'}")
    return 0


_COMMANDS = {
    "generate": _cmd_generate,
    "cluster": _cmd_cluster,
    "estimate-k": _cmd_estimate_k,
    "evaluate": _cmd_evaluate,
    "experiment": _cmd_experiment,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except (DataError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ConvergenceError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, TypeError, KeyError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

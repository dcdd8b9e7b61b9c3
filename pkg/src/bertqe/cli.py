"""Command-line entry point wiring the toolkit into reproducible experiments.

Every default matches the canonical pipeline configuration, so a bare
``bertqe qe`` invocation reproduces it. All outputs are written atomically
and are byte-identical across reruns with identical inputs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from . import costmodel, evaluation, expansion, lexical, pipeline, runio
from .corpus import Document, corpus_by_id, load_corpus
from .index import InvertedIndex, atomic_write_text, build_index
from .scoring import MockLexicalScorer, RemoteScorer, Scorer

SCORER_ENDPOINT_ENV = "BERTQE_SCORER_ENDPOINT"


class CliError(Exception):
    pass


def _json_dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _resolve_scorer(spec: str, index: InvertedIndex) -> Scorer:
    """``mock`` builds the offline scorer; anything else is an endpoint.

    The endpoint environment variable overrides any remote URL so deployed
    experiments can be repointed without editing configs.
    """
    if spec == "mock":
        return MockLexicalScorer(index=index)
    endpoint = os.environ.get(SCORER_ENDPOINT_ENV) or spec
    if spec == "remote" and not os.environ.get(SCORER_ENDPOINT_ENV):
        raise CliError(f"scorer 'remote' needs {SCORER_ENDPOINT_ENV} to be set")
    return RemoteScorer(endpoint)


def _load_experiment(args) -> Tuple[Dict[str, Document], InvertedIndex, List[lexical.Query]]:
    docs = corpus_by_id(load_corpus(args.corpus))
    if args.index and Path(args.index).exists():
        index = InvertedIndex.load(args.index)
    else:
        index = build_index(docs.values())
    queries = runio.read_queries(args.queries)
    return docs, index, queries


def _pipeline_config(args) -> pipeline.PipelineConfig:
    config = pipeline.PipelineConfig(
        k_d=args.kd,
        k_c=args.kc,
        m=args.m,
        alpha=args.alpha,
        beta=args.beta,
        rerank_depth=args.depth,
        ablation=args.ablation,
    )
    config.validate()
    return config


def _phase_scorers(args, index: InvertedIndex) -> pipeline.PhaseScorers:
    cache: Dict[str, Scorer] = {}

    def get(spec: str) -> Scorer:
        if spec not in cache:
            cache[spec] = _resolve_scorer(spec, index)
        return cache[spec]

    return pipeline.PhaseScorers(
        phase1=get(args.scorer_phase1),
        phase2=get(args.scorer_phase2),
        phase3=get(args.scorer_phase3),
    )


def _add_pipeline_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--kd", type=int, default=10, help="feedback document count")
    parser.add_argument("--kc", type=int, default=10, help="selected chunk count")
    parser.add_argument("--m", type=int, default=10, help="chunk length in tokens")
    parser.add_argument("--alpha", type=float, default=0.4)
    parser.add_argument("--beta", type=float, default=0.9)
    parser.add_argument("--depth", type=int, default=1000, help="re-rank depth")
    parser.add_argument("--ablation", choices=pipeline.ABLATIONS, default="none")
    parser.add_argument("--scorer-phase1", default="mock")
    parser.add_argument("--scorer-phase2", default="mock")
    parser.add_argument("--scorer-phase3", default="mock")
    parser.add_argument("--seed", type=int, default=0,
                        help="reserved for sampling utilities; the core path is deterministic")


# -- subcommands -------------------------------------------------------------


def cmd_index(args) -> int:
    docs = load_corpus(args.corpus)
    if not docs:
        raise CliError(f"corpus {args.corpus} contains no documents")
    index = build_index(docs)
    index.save(args.out)
    stats = {
        "documents": index.num_docs,
        "total_tokens": index.total_tokens,
        "vocabulary": len(list(index.vocabulary)),
        "avg_doc_length": index.avg_doc_length,
    }
    print(_json_dumps(stats), end="")
    return 0


def cmd_rank(args) -> int:
    docs, index, queries = _load_experiment(args)
    runs = {}
    for query in queries:
        if args.model == "dph+kl":
            runs[query.query_id] = expansion.dph_kl_pipeline(index, query, docs, k=args.k)
        else:
            runs[query.query_id] = lexical.rank(index, query, args.model, k=args.k)
    runio.write_run(args.out, runs, tag=args.tag)
    return 0


def _run_pipeline(args, docs, index, queries, config):
    initial_runs = runio.read_run(args.run)
    scorers = _phase_scorers(args, index)
    return pipeline.run_bertqe(queries, initial_runs, docs, config, scorers)


def cmd_qe(args) -> int:
    docs, index, queries = _load_experiment(args)
    config = _pipeline_config(args)
    result = _run_pipeline(args, docs, index, queries, config)
    out_dir = Path(args.out)
    runio.write_run(out_dir / "bertqe.run", result.runs, tag=args.tag)
    trace_lines = [
        json.dumps(result.traces[qid], sort_keys=True) for qid in sorted(result.traces)
    ]
    atomic_write_text(out_dir / "trace.jsonl", "\n".join(trace_lines) + ("\n" if trace_lines else ""))
    if result.failures:
        atomic_write_text(out_dir / "failures.json", _json_dumps(result.failures))
        print(f"{len(result.failures)} queries failed; partial output in {out_dir}", file=sys.stderr)
        return 1
    return 0


def cmd_eval(args) -> int:
    runs = runio.read_run(args.run)
    qrels = runio.read_qrels(args.qrels)
    metrics = args.metrics.split(",")
    for metric in metrics:
        if metric not in evaluation.METRICS:
            raise CliError(f"unknown metric {metric!r}; expected one of {evaluation.METRICS}")
    report = evaluation.evaluate_runs(runs, qrels, metrics)
    payload = {
        "means": report.means,
        "per_query": report.per_query,
        "skipped": report.skipped,
    }
    if args.out:
        atomic_write_text(args.out, _json_dumps(payload))
    for metric in metrics:
        print(f"{metric}\t{report.means[metric]:.4f}")
    return 0


def cmd_sigtest(args) -> int:
    runs_a = runio.read_run(args.run_a)
    runs_b = runio.read_run(args.run_b)
    qrels = runio.read_qrels(args.qrels)
    if args.metric not in evaluation.METRICS:
        raise CliError(f"unknown metric {args.metric!r}")
    shared = sorted(
        q for q in runs_a if q in runs_b and qrels.has_query(q)
    )
    if len(shared) < 2:
        raise CliError("need at least two shared judged queries")
    a = [evaluation.compute_metric(runs_a[q], qrels, args.metric) for q in shared]
    b = [evaluation.compute_metric(runs_b[q], qrels, args.metric) for q in shared]
    result = evaluation.paired_ttest(a, b)
    print(f"n={len(shared)} t={result.t:.4f} p={result.p:.6f} stars={result.stars or '-'}")
    return 0


def _grid_cells(traces: Dict[str, dict]) -> Dict[Tuple[float, float], Dict[str, lexical.RankedList]]:
    cells = {}
    for alpha in evaluation.GRID_VALUES:
        for beta in evaluation.GRID_VALUES:
            cells[(alpha, beta)] = {
                qid: pipeline.recombine_trace(trace, alpha, beta)
                for qid, trace in traces.items()
            }
    return cells


def cmd_cv(args) -> int:
    docs, index, queries = _load_experiment(args)
    qrels = runio.read_qrels(args.qrels)
    config = _pipeline_config(args)
    result = _run_pipeline(args, docs, index, queries, config)
    if args.folds:
        plan = evaluation.make_folds(
            [q.query_id for q in queries],
            strategy="external_file",
            external=runio.read_folds(args.folds),
        )
    else:
        plan = evaluation.make_folds([q.query_id for q in queries], strategy="round_robin")
    cells = _grid_cells(result.traces)
    report = evaluation.cross_validate(plan, cells, qrels)
    payload = {
        "folds": [
            {
                "fold": f.fold,
                "alpha": f.alpha,
                "beta": f.beta,
                "test_queries": list(f.test_queries),
                "means": f.means,
            }
            for f in report.folds
        ],
        "pooled_means": report.pooled_means,
        "failures": result.failures,
    }
    out_dir = Path(args.out)
    atomic_write_text(out_dir / "cv_report.json", _json_dumps(payload))
    header = ["fold"] + list(evaluation.METRICS) + ["alpha", "beta"]
    lines = ["\t".join(header)]
    for f in report.folds:
        row = [str(f.fold)] + [f"{f.means[m]:.4f}" for m in evaluation.METRICS]
        row += [f"{f.alpha:.1f}", f"{f.beta:.1f}"]
        lines.append("\t".join(row))
    pooled = ["pooled"] + [f"{report.pooled_means[m]:.4f}" for m in evaluation.METRICS] + ["-", "-"]
    lines.append("\t".join(pooled))
    table = "\n".join(lines) + "\n"
    atomic_write_text(out_dir / "cv_report.txt", table)
    print(table, end="")
    return 1 if result.failures else 0


def cmd_sweep(args) -> int:
    values = [int(v) for v in args.values.split(",")]
    if any(v <= 0 for v in values):
        raise CliError("sweep values must be positive")
    docs, index, queries = _load_experiment(args)
    qrels = runio.read_qrels(args.qrels)
    metrics = ("P@20", "NDCG@20", "MAP@1000")
    rows = []
    for value in values:
        overrides = {"k_c": value} if args.param == "kc" else {"m": value}
        base = _pipeline_config(args)
        config = pipeline.PipelineConfig(
            k_d=base.k_d,
            k_c=overrides.get("k_c", base.k_c),
            m=overrides.get("m", base.m),
            alpha=base.alpha,
            beta=base.beta,
            rerank_depth=base.rerank_depth,
            ablation=base.ablation,
        )
        result = _run_pipeline(args, docs, index, queries, config)
        report = evaluation.evaluate_runs(result.runs, qrels, metrics)
        rows.append((value, report.means, bool(result.failures)))
    lines = ["\t".join([args.param] + list(metrics))]
    for value, means, _ in rows:
        lines.append("\t".join([str(value)] + [f"{means[m]:.4f}" for m in metrics]))
    table = "\n".join(lines) + "\n"
    if args.out:
        atomic_write_text(args.out, table)
    print(table, end="")
    return 1 if any(failed for _, _, failed in rows) else 0


def cmd_cost(args) -> int:
    workload = costmodel.Workload(
        depth=args.depth,
        chunks_per_doc=args.chunks_per_doc,
        k_d=args.kd,
        k_c=args.kc,
        seq_phase1=args.seq_phase1,
        seq_phase2=args.seq_phase2,
        seq_phase3=args.seq_phase3,
    )
    if args.config:
        reports = [costmodel.pipeline_flops(args.config, workload)]
    else:
        reports = costmodel.cost_table(workload)
    lines = ["configuration\tFLOPs\tratio"]
    for r in reports:
        lines.append(f"{r.configuration}\t{r.total_flops:.4e}\t{r.ratio:.2f}x")
    table = "\n".join(lines) + "\n"
    print(table, end="")
    if args.json:
        atomic_write_text(args.json, _json_dumps([r.to_dict() for r in reports]))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bertqe", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="build and persist an inverted index")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_index)

    p = sub.add_parser("rank", help="lexical retrieval to a TREC run file")
    p.add_argument("--corpus", required=True)
    p.add_argument("--index", default=None)
    p.add_argument("--queries", required=True)
    p.add_argument("--model", choices=("bm25", "ql", "dph", "dph+kl"), default="dph+kl")
    p.add_argument("--k", type=int, default=1000)
    p.add_argument("--tag", default="bertqe")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_rank)

    p = sub.add_parser("qe", help="three-phase chunk expansion re-ranking")
    p.add_argument("--corpus", required=True)
    p.add_argument("--index", default=None)
    p.add_argument("--queries", required=True)
    p.add_argument("--run", required=True, help="initial TREC run file")
    p.add_argument("--tag", default="bertqe")
    p.add_argument("--out", required=True, help="output directory")
    _add_pipeline_flags(p)
    p.set_defaults(fn=cmd_qe)

    p = sub.add_parser("eval", help="evaluate a run file against qrels")
    p.add_argument("--run", required=True)
    p.add_argument("--qrels", required=True)
    p.add_argument("--metrics", default=",".join(evaluation.METRICS))
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("sigtest", help="paired two-tailed t-test between runs")
    p.add_argument("--run-a", required=True)
    p.add_argument("--run-b", required=True)
    p.add_argument("--qrels", required=True)
    p.add_argument("--metric", default="NDCG@20")
    p.set_defaults(fn=cmd_sigtest)

    p = sub.add_parser("cv", help="five-fold cross-validation with grid search")
    p.add_argument("--corpus", required=True)
    p.add_argument("--index", default=None)
    p.add_argument("--queries", required=True)
    p.add_argument("--qrels", required=True)
    p.add_argument("--run", required=True, help="initial TREC run file")
    p.add_argument("--folds", default=None, help="external fold file")
    p.add_argument("--out", required=True, help="output directory")
    _add_pipeline_flags(p)
    p.set_defaults(fn=cmd_cv)

    p = sub.add_parser("sweep", help="metric table over k_c or m values")
    p.add_argument("--param", choices=("kc", "m"), required=True)
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--corpus", required=True)
    p.add_argument("--index", default=None)
    p.add_argument("--queries", required=True)
    p.add_argument("--qrels", required=True)
    p.add_argument("--run", required=True)
    p.add_argument("--out", default=None)
    _add_pipeline_flags(p)
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("cost", help="FLOPs cost table for configurations")
    p.add_argument("--config", default=None, help="e.g. LLS; omit for the full table")
    p.add_argument("--depth", type=int, default=1000)
    p.add_argument("--chunks-per-doc", type=int, default=240)
    p.add_argument("--kd", type=int, default=10)
    p.add_argument("--kc", type=int, default=10)
    p.add_argument("--seq-phase1", type=int, default=costmodel.MAX_SEQ)
    p.add_argument("--seq-phase2", type=int, default=32)
    p.add_argument("--seq-phase3", type=int, default=costmodel.MAX_SEQ)
    p.add_argument("--json", default=None)
    p.set_defaults(fn=cmd_cost)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (CliError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""mvn-retrieval command line interface."""

from __future__ import annotations

import argparse
import logging
import sys
from typing import List, Optional

from .config.loader import ConfigLoader
from .errors import ContractViolation, MvnrError, UsageError
from .evaluation.metrics import METRIC_NAMES
from .evaluation.trec import format_per_query
from .main import RetrievalEngine


def show_help() -> None:
    """Print CLI help."""

    print(
        """
mvnr - Gaussian-embedding dense retrieval

USAGE:
    mvnr [--config PATH] [--seed N] [--verbose] <command> [options]
    python -m mvn_retrieval.cli <command> [options]

COMMANDS:
    ingest   EMBEDDINGS OUT_INDEX      Build and persist an index (--flat | --graph)
    search   INDEX QUERIES             Batch retrieval into a TREC run (--top-k, --out)
    eval     RUN QRELS                 MRR@10, NDCG@10 and MAP (--per-query)
    qpp      QUERIES PER_QUERY         Variance predictor vs. effectiveness (Pearson, Kendall)
    synth    OUT_DIR                   Generate a seeded synthetic task
    train                              Train the toy encoder (or --gradient-check)
    encode   PARAMS FEATURES OUT       Encode feature vectors into embeddings

EXAMPLES:
    mvnr synth data/ --k 8
    mvnr ingest data/docs.jsonl data/docs.mvnr --graph
    mvnr search data/docs.mvnr data/queries_test.jsonl --top-k 100 --out run.txt
    mvnr eval run.txt data/qrels.txt --per-query > per_query.txt
    mvnr qpp data/queries_test.jsonl per_query.txt --reduction l2
    mvnr train --doc-features data/doc_features.jsonl \\
               --query-features data/query_features_train.jsonl \\
               --qrels data/qrels.txt --teacher-scores data/teacher_scores.tsv \\
               --bm25-run data/bm25_run.txt --k 8 --out encoder.npz
    mvnr train --gradient-check

OPTIONS:
    --config PATH      Config file (default: mvnr.yaml / mvnr.yml / mvnr.json)
    --seed N           Seed for every random choice (overrides MVNR_SEED)
    --verbose          Debug logging (MVNR_LOG_LEVEL sets the level otherwise)
    -h, --help         Show this help message

Errors are reported on stderr as a single line: error[CODE]: message
"""
    )


def make_engine(args: argparse.Namespace) -> RetrievalEngine:
    return RetrievalEngine(
        ".",
        config_file=args.config,
        log_level=args.log_level,
        seed=args.seed,
    )


def cmd_ingest(args: argparse.Namespace) -> int:
    engine = make_engine(args)
    summary = engine.ingest(
        args.embeddings,
        args.out_index,
        kind=args.kind,
        M=args.M,
        ef_construction=args.ef_construction,
        ef_search=args.ef_search,
    )
    print(f"ingested {summary.count} documents (k={summary.k}) into {summary.path} [{summary.kind}]")
    return 0


def cmd_search(args: argparse.Namespace) -> int:
    engine = make_engine(args)
    run = engine.search(
        args.index,
        args.queries,
        args.top_k,
        out_run_path=args.out,
        ef_search=args.ef_search,
        scoring=args.scoring,
        workers=args.workers,
    )
    if not args.out:
        for records in run.values():
            for record in records:
                print(record.to_line())
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    engine = make_engine(args)
    report = engine.evaluate(args.run, args.qrels, args.map_threshold, args.workers)
    if args.per_query:
        for name in METRIC_NAMES:
            for line in format_per_query(name, report.per_query[name]):
                print(line)
    for name in METRIC_NAMES:
        print(f"{name}\tall\t{report.means[name]:.4f}")
    return 0


def cmd_qpp(args: argparse.Namespace) -> int:
    engine = make_engine(args)
    report = engine.qpp(args.queries, args.per_query, args.reduction, args.metric)
    for record in report.records:
        print(f"{record.query_id}\t{record.predictor:.6g}\t{record.effectiveness:.6f}")
    print(f"pearson\t{report.pearson:.4f}")
    print(f"p_value\t{report.p_value:.4g}")
    print(f"kendall\t{report.kendall:.4f}")
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    engine = make_engine(args)
    paths = engine.synthesize(
        args.out_dir,
        k=args.k,
        topics=args.topics,
        docs=args.docs,
        train_queries=args.train_queries,
        test_queries=args.test_queries,
        teacher_noise=args.teacher_noise,
    )
    for role, path in paths.items():
        print(f"{role}\t{path}")
    return 0


TRAIN_INPUTS = ("doc_features", "query_features", "qrels", "teacher_scores", "out")


def cmd_train(args: argparse.Namespace) -> int:
    engine = make_engine(args)
    if args.gradient_check:
        results = engine.gradient_check()
        for seed, result in enumerate(results):
            print(
                f"seed {seed}\tW_M {result.error_W_M:.3e}\tW_S {result.error_W_S:.3e}\t"
                f"{'ok' if result.passed else 'FAIL'}"
            )
        worst = max(result.max_error for result in results)
        print(f"max relative error {worst:.3e} (tolerance {results[0].tolerance:g})")
        return 0 if all(result.passed for result in results) else 1

    missing = [f"--{name.replace('_', '-')}" for name in TRAIN_INPUTS if not getattr(args, name)]
    if missing:
        raise ContractViolation(f"train requires {', '.join(missing)}")
    result = engine.train(
        args.doc_features,
        args.query_features,
        args.qrels,
        args.teacher_scores,
        args.out,
        bm25_run=args.bm25_run,
        steps=args.steps,
        k=args.k,
        log_path=args.log,
    )
    final = f"{result.losses[-1]:.6f}" if result.losses else "n/a"
    print(f"trained {result.steps} steps, final loss {final}, parameters in {args.out}")
    return 0


def cmd_encode(args: argparse.Namespace) -> int:
    engine = make_engine(args)
    count = engine.encode(args.params, args.features, args.out_embeddings)
    print(f"encoded {count} items into {args.out_embeddings}")
    return 0


class ArgumentParser(argparse.ArgumentParser):
    """Parser that raises UsageError instead of printing usage and exiting."""

    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(
        prog="mvnr",
        description="Dense retrieval with diagonal Gaussian embeddings",
        add_help=False,
    )
    parser.add_argument("--config", type=str, help="Configuration file")
    parser.add_argument("--seed", type=int, help="Random seed")
    parser.add_argument("--verbose", action="store_true", help="Debug logging")
    parser.add_argument("-h", "--help", action="store_true", help="Show help message")

    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    ingest_parser = subparsers.add_parser("ingest", help="Build and persist an index")
    ingest_parser.add_argument("embeddings")
    ingest_parser.add_argument("out_index")
    kind = ingest_parser.add_mutually_exclusive_group()
    kind.add_argument("--flat", dest="kind", action="store_const", const="flat")
    kind.add_argument("--graph", dest="kind", action="store_const", const="graph")
    ingest_parser.add_argument("--M", type=int)
    ingest_parser.add_argument("--ef-construction", type=int)
    ingest_parser.add_argument("--ef-search", type=int)
    ingest_parser.set_defaults(func=cmd_ingest)

    search_parser = subparsers.add_parser("search", help="Batch retrieval into a run file")
    search_parser.add_argument("index")
    search_parser.add_argument("queries")
    search_parser.add_argument("--top-k", type=int, required=True)
    search_parser.add_argument("--out", type=str, help="Run file (stdout when omitted)")
    search_parser.add_argument("--ef-search", type=int)
    search_parser.add_argument("--scoring", choices=["product", "trace"])
    search_parser.add_argument("--workers", type=int)
    search_parser.set_defaults(func=cmd_search)

    eval_parser = subparsers.add_parser("eval", help="Evaluate a run")
    eval_parser.add_argument("run")
    eval_parser.add_argument("qrels")
    eval_parser.add_argument("--per-query", action="store_true")
    eval_parser.add_argument("--map-threshold", type=int)
    eval_parser.add_argument("--workers", type=int)
    eval_parser.set_defaults(func=cmd_eval)

    qpp_parser = subparsers.add_parser("qpp", help="Query performance prediction study")
    qpp_parser.add_argument("queries")
    qpp_parser.add_argument("per_query")
    qpp_parser.add_argument("--reduction", choices=["l2", "log_det", "trace"])
    qpp_parser.add_argument("--metric", choices=list(METRIC_NAMES))
    qpp_parser.set_defaults(func=cmd_qpp)

    synth_parser = subparsers.add_parser("synth", help="Generate a synthetic task")
    synth_parser.add_argument("out_dir")
    synth_parser.add_argument("--k", type=int)
    synth_parser.add_argument("--topics", type=int)
    synth_parser.add_argument("--docs", type=int)
    synth_parser.add_argument("--train-queries", type=int)
    synth_parser.add_argument("--test-queries", type=int)
    synth_parser.add_argument("--teacher-noise", type=float)
    synth_parser.set_defaults(func=cmd_synth)

    train_parser = subparsers.add_parser("train", help="Train the toy encoder")
    train_parser.add_argument("--doc-features")
    train_parser.add_argument("--query-features")
    train_parser.add_argument("--qrels")
    train_parser.add_argument("--teacher-scores")
    train_parser.add_argument("--bm25-run")
    train_parser.add_argument("--out", help="Encoder parameter file (.npz)")
    train_parser.add_argument("--steps", type=int)
    train_parser.add_argument("--k", type=int)
    train_parser.add_argument("--log", help="Per-step training log (TSV)")
    train_parser.add_argument("--gradient-check", action="store_true")
    train_parser.set_defaults(func=cmd_train)

    encode_parser = subparsers.add_parser("encode", help="Encode features with trained parameters")
    encode_parser.add_argument("params")
    encode_parser.add_argument("features")
    encode_parser.add_argument("out_embeddings")
    encode_parser.set_defaults(func=cmd_encode)

    return parser


def resolve_log_level(verbose: bool) -> int:
    if verbose:
        return logging.DEBUG
    name = ConfigLoader().env_log_level()
    level = logging.getLevelName(name) if name else logging.INFO
    return level if isinstance(level, int) else logging.INFO


def main(argv: Optional[List[str]] = None) -> int:
    """CLI entry point."""

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.help or not args.command:
            show_help()
            return 0
        args.log_level = resolve_log_level(args.verbose)
        return args.func(args)
    except MvnrError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:  # pragma: no cover - user interrupt
        print("error[INTERRUPTED]: operation cancelled by user", file=sys.stderr)
        return 130
    except OSError as exc:
        print(f"error[IO]: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - unexpected failure
        print(f"error[INTERNAL]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())

"""Command line pipeline: ingest, detect, eval, synth, sweep.

Stages communicate through files so each step can be rerun or swept without
repeating the ones before it.  Exit codes: 0 success, 1 input error,
2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import __version__
from .errors import ConfigError, InputError
from .evaluate import (
    SweepGrid,
    SWEEP_COLUMNS,
    pairwise_metrics,
    read_truth,
    sweep,
    sweep_rows_to_csv,
    write_truth,
)
from .features import write_features_tsv
from .ingest import (
    build_interaction_graph,
    convert_telegram_export,
    parse_messages_path,
    read_edges_tsv,
    write_edges_tsv,
)
from .pipeline import (
    RunConfig,
    read_candidates_tsv,
    run_detection,
    write_candidates_tsv,
)
from .simhash import HashConfig, write_fingerprints_tsv
from .synth import SynthConfig, generate


def _add_run_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--bits", type=int, default=128, help="fingerprint width")
    parser.add_argument("--max-distance", type=int, default=20, help="Hamming radius")
    parser.add_argument("--threshold", type=float, default=0.5, help="weight cutoff")
    parser.add_argument("--mode", choices=("max", "sum"), default="max")
    parser.add_argument("--direction", choices=("out", "in", "both"), default="out")
    parser.add_argument("--weighting", choices=("weighted", "binary"), default="weighted")
    parser.add_argument("--seed", type=int, default=0)


def _run_config(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        bits=args.bits,
        max_distance=args.max_distance,
        theta=args.threshold,
        mode=args.mode,
        direction=args.direction,
        weighting=args.weighting,
        seed=args.seed,
    )


def _out_dir(args: argparse.Namespace) -> Path:
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_ingest(args: argparse.Namespace) -> int:
    if args.telegram:
        with open(args.input, encoding="utf-8") as fh:
            try:
                document = json.load(fh)
            except json.JSONDecodeError as exc:
                raise InputError(f"export is not valid JSON: {exc.msg}")
        records = convert_telegram_export(document)
    else:
        records = parse_messages_path(args.input)
    if not records:
        print("warning: no messages parsed", file=sys.stderr)
    graph = build_interaction_graph(records)
    out = _out_dir(args)
    write_edges_tsv(graph, out / "edges.tsv")
    print(
        f"ingested {len(records)} messages: {graph.node_count} users,"
        f" {graph.edge_count} reply edges -> {out / 'edges.tsv'}"
    )
    return 0


def cmd_detect(args: argparse.Namespace) -> int:
    cfg = _run_config(args)
    graph = read_edges_tsv(args.input)
    result = run_detection(graph, cfg)

    largest = result.stats["largest_bucket"]
    bucket_warn = 8 * math.isqrt(max(result.stats["fingerprinted"], 1))
    if largest > bucket_warn:
        print(
            f"warning: largest bucket has {largest} members (> {bucket_warn});"
            " candidate generation degrades toward all-pairs inside it",
            file=sys.stderr,
        )

    out = _out_dir(args)
    write_candidates_tsv(result.candidates, cfg, out / "candidates.tsv")
    report = {"config": cfg.to_dict(), **result.report.to_dict()}
    (out / "report.json").write_text(
        json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    write_features_tsv(
        result.feature_maps, out / "features.tsv", header_lines=[cfg.header_line()]
    )
    write_fingerprints_tsv(
        result.fingerprints, HashConfig(b=cfg.bits, seed=cfg.seed), out / "fingerprints.tsv"
    )
    (out / "stats.json").write_text(
        json.dumps(result.stats, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )

    secs = result.stats["seconds"]
    print(cfg.header_line())
    print(
        f"{result.stats['nodes']} users, {result.stats['edges']} edges,"
        f" {result.stats['fingerprinted']} fingerprinted"
        f" ({result.stats['unfingerprintable']} without features)"
    )
    print(
        f"{result.stats['candidates']} candidate pairs,"
        f" {result.stats['clusters']} clusters,"
        f" {result.stats['mutual_matches']} mutual matches"
    )
    print(
        f"timings: fingerprint {secs['fingerprint']:.3f}s,"
        f" candidate generation {secs['candidate_generation']:.3f}s"
        f" (index {secs['index_build']:.3f}s + pairs {secs['candidate_pairs']:.3f}s),"
        f" total {secs['total']:.3f}s"
    )
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    predicted = read_candidates_tsv(args.input)
    truth = read_truth(args.truth)
    report = pairwise_metrics(predicted, truth)
    print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    print(
        f"precision {report.precision:.4f}  recall {report.recall:.4f}"
        f"  f1 {report.f1:.4f}  (tp={report.tp} fp={report.fp} fn={report.fn})",
        file=sys.stderr,
    )
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    cfg = SynthConfig(
        n=args.nodes,
        mean_out_degree=args.mean_degree,
        clones=args.clones,
        perturbation=args.perturbation,
        weight_max=args.weight_max,
        seed=args.seed,
    )
    graph, truth = generate(cfg)
    out = _out_dir(args)
    write_edges_tsv(graph, out / "edges.tsv")
    write_truth(truth, out / "truth.txt")
    (out / "manifest.json").write_text(
        json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(
        f"generated {graph.node_count} users, {graph.edge_count} edges,"
        f" {len(truth.clusters)} planted pairs -> {out}"
    )
    return 0


def _int_list(text: str) -> list[int]:
    return [int(part) for part in text.split(",") if part]


def _float_list(text: str) -> list[float]:
    return [float(part) for part in text.split(",") if part]


def _str_list(text: str) -> list[str]:
    return [part for part in text.split(",") if part]


def cmd_sweep(args: argparse.Namespace) -> int:
    graph = read_edges_tsv(args.input)
    truth = read_truth(args.truth)
    grid = SweepGrid(
        bits=_int_list(args.bits),
        max_distances=_int_list(args.max_distance),
        thetas=_float_list(args.threshold),
        directions=_str_list(args.direction),
        modes=_str_list(args.mode),
        weightings=_str_list(args.weighting),
    )
    rows = sweep(graph, truth, grid, seed=args.seed)
    out = _out_dir(args)
    sweep_rows_to_csv(rows, out / "sweep.csv")

    print(SWEEP_COLUMNS.replace(",", "\t"))
    for r in rows:
        if r.report is not None:
            metrics = (
                f"{r.report.tp}\t{r.report.fp}\t{r.report.fn}\t"
                f"{r.report.precision:.4f}\t{r.report.recall:.4f}\t{r.report.f1:.4f}"
            )
        else:
            metrics = "-\t-\t-\t-\t-\t-"
        print(
            f"{r.bits}\t{r.max_distance}\t{r.theta}\t{r.direction}\t{r.mode}\t"
            f"{r.weighting}\t{r.seed}\t{r.status}\t{r.candidates}\t{metrics}\t"
            f"{r.seconds:.3f}\t{r.error}"
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sockdetect",
        description="Detect likely same-person account pairs from chat reply graphs.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse messages and write the reply graph")
    p.add_argument("--input", required=True, help="message JSONL or Telegram export")
    p.add_argument("--telegram", action="store_true", help="input is a Telegram export")
    p.add_argument("--output-dir", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("detect", help="fingerprint users and retrieve near pairs")
    p.add_argument("--input", required=True, help="edge-list TSV")
    p.add_argument("--output-dir", required=True)
    _add_run_config_flags(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("eval", help="score candidates against ground truth")
    p.add_argument("--input", required=True, help="candidates TSV")
    p.add_argument("--truth", required=True, help="truth clusters file")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="generate a synthetic corpus with planted clones")
    p.add_argument("--output-dir", required=True)
    p.add_argument("--nodes", type=int, default=1000)
    p.add_argument("--mean-degree", type=float, default=8.0)
    p.add_argument("--clones", type=int, default=0)
    p.add_argument("--perturbation", type=float, default=0.0)
    p.add_argument("--weight-max", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("sweep", help="grid-search parameters against ground truth")
    p.add_argument("--input", required=True, help="edge-list TSV")
    p.add_argument("--truth", required=True)
    p.add_argument("--output-dir", required=True)
    p.add_argument("--bits", default="128", help="comma-separated widths")
    p.add_argument("--max-distance", default="20", help="comma-separated radii")
    p.add_argument("--threshold", default="0.5", help="comma-separated cutoffs")
    p.add_argument("--mode", default="max", help="comma-separated modes")
    p.add_argument("--direction", default="out", help="comma-separated directions")
    p.add_argument("--weighting", default="weighted", help="comma-separated weightings")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

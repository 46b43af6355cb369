"""Command-line entry point.

Exit codes: 0 success, 1 domain error (bad data, config, selection), 2 usage error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import CircumplexEvalError
from .ingest import demographics_summary, filter_ccr, load_config, load_respondents, load_responses
from .pipeline import run_study
from .report import emit_radar, render_mean_scores, render_pvalue_tables
from .synth import load_spec, write_dataset

TABLE_FILES = ("mean_scores", "cross_national", "posthoc_mww", "intra_country", "combined_kw")


def _add_inputs(p: argparse.ArgumentParser, respondents_required: bool = False) -> None:
    p.add_argument("--responses", required=True, type=Path, help="long-format responses.csv")
    p.add_argument("--respondents", required=respondents_required, type=Path,
                   help="respondents.csv with demographics")
    p.add_argument("--config", required=True, type=Path, help="study config (JSON)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="circumplex-eval",
        description="Evaluate PAQ attribute translation candidates from survey ratings.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("ingest-check", help="validate input files and report the CCR exclusion")
    _add_inputs(p)

    p = sub.add_parser("demographics", help="print the demographics table")
    _add_inputs(p, respondents_required=True)

    p = sub.add_parser("analyze", help="write mean-score and p-value tables")
    _add_inputs(p)
    p.add_argument("--out", required=True, type=Path, help="output directory")
    p.add_argument("--format", choices=("csv", "md"), default="csv")
    p.add_argument("--alpha", type=float, default=None, help="significance level (default from config)")
    p.add_argument("--combined", action="store_true",
                   help="also test candidates on the combined population")

    p = sub.add_parser("radar", help="write radar-chart data for selected candidates")
    _add_inputs(p)
    p.add_argument("--select", required=True,
                   help="comma-separated attribute=candidate pairs, e.g. calm=tenang,annoying=membingitkan")
    p.add_argument("--out", required=True, type=Path, help="output file ending in .svg or .csv")

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--spec", required=True, type=Path, help="generator spec (JSON)")
    p.add_argument("--seed", type=int, default=None, help="override the spec's seed")
    p.add_argument("--out", required=True, type=Path, help="output directory")
    return parser


def _load(args):
    config = load_config(args.config)
    records, respondents = load_responses(args.responses, config, args.respondents)
    return config, records, respondents


def _parse_selection(text: str, parser: argparse.ArgumentParser) -> dict[str, str]:
    selection = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        attr, sep, cand = item.partition("=")
        if not sep or not attr.strip() or not cand.strip():
            parser.error(f"--select expects attribute=candidate, got {item!r}")
        selection[attr.strip()] = cand.strip()
    if not selection:
        parser.error("--select is empty")
    return selection


def _cmd_ingest_check(args) -> int:
    config, records, respondents = _load(args)
    _, report = filter_ccr(records, respondents, config)
    print(f"{len(records)} rating records from {len(respondents)} respondents")
    print(report.summary())
    return 0


def _cmd_demographics(args) -> int:
    config = load_config(args.config)
    load_responses(args.responses, config, args.respondents)
    table = demographics_summary(load_respondents(args.respondents), config.country_whitelist)
    print(table.render())
    return 0


def _cmd_analyze(args) -> int:
    config, records, respondents = _load(args)
    if args.alpha is not None:
        config = config.with_alpha(args.alpha)
    study = run_study(records, respondents, config, combined=args.combined)
    tables = [render_mean_scores(study)] + render_pvalue_tables(study)
    args.out.mkdir(parents=True, exist_ok=True)
    for name, table in zip(TABLE_FILES, tables):
        path = args.out / f"{name}.{args.format}"
        text = table.to_csv() if args.format == "csv" else table.to_markdown()
        path.write_text(text, encoding="utf-8", newline="")
    print(study.exclusion.summary())
    print(f"analyzed {len(study.analyses)} attributes at alpha={study.alpha:g}; wrote {len(tables)} tables to {args.out}")
    return 0


def _cmd_radar(args, parser) -> int:
    selection = _parse_selection(args.select, parser)
    suffix = args.out.suffix.lower().lstrip(".")
    if suffix not in ("svg", "csv"):
        parser.error("--out must end in .svg or .csv")
    config, records, respondents = _load(args)
    study = run_study(records, respondents, config)
    doc = emit_radar(study, selection, suffix)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(doc, encoding="utf-8", newline="")
    print(f"wrote {suffix} radar for {len(selection)} selection(s) to {args.out}")
    return 0


def _cmd_synth(args) -> int:
    spec = load_spec(args.spec)
    if args.seed is not None:
        spec = spec.with_seed(args.seed)
    paths = write_dataset(spec, args.out)
    print(f"seed {spec.seed}: wrote " + ", ".join(p.name for p in paths.values()) + f" to {args.out}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "ingest-check":
            return _cmd_ingest_check(args)
        if args.command == "demographics":
            return _cmd_demographics(args)
        if args.command == "analyze":
            return _cmd_analyze(args)
        if args.command == "radar":
            return _cmd_radar(args, parser)
        if args.command == "synth":
            return _cmd_synth(args)
    except CircumplexEvalError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    parser.error(f"unknown command {args.command!r}")  # pragma: no cover
    return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

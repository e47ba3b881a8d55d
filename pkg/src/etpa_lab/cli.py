"""Command-line entry point: ``etpa-lab {simulate,analyze,roundtrip,demo}``.

Exit status: 0 on success, 1 on a runtime or data error, 2 on bad usage.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .config import RunConfig, load_config, resolve_seed
from .dataset_io import save_dataset
from .pipeline import analyze, demo, roundtrip, simulate
from .report import emit_report, render_kv, render_table

log = logging.getLogger("etpa_lab")


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="run configuration file")
    common.add_argument("--seed", type=int, metavar="N", help="master seed (overrides config and $ETPA_LAB_SEED)")
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--format", choices=("table", "kv"), help="report format")
    common.add_argument("--subtract-accidentals", action="store_true", default=None,
                        help="subtract s1*s2*tau from coincidence rates before fitting")
    common.add_argument("--weights", choices=("std", "stderr"),
                        help="fit weights: per-point std (default) or stderr of the mean")
    common.add_argument("-q", "--quiet", action="store_true", help="do not print the report")

    p = argparse.ArgumentParser(prog="etpa-lab", description="Simulate and analyze ETPA coincidence experiments.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="simulate a dataset CSV from a config")
    a = sub.add_parser("analyze", parents=[common], help="analyze a dataset CSV")
    a.add_argument("--dataset", metavar="PATH", help="dataset CSV (overrides [io] dataset)")
    sub.add_parser("roundtrip", parents=[common], help="simulate, analyze and compare with the configured truth")
    sub.add_parser("demo", parents=[common], help="built-in ZnTPP/RhB concentration-series run")
    return p


def _build_config(args: argparse.Namespace) -> RunConfig:
    if args.config:
        config = load_config(args.config)
    else:
        config = RunConfig()
        config = config.with_overrides(seed=resolve_seed(None, None))
    over: dict = {"mode": args.command}
    if args.seed is not None:
        over["seed"] = args.seed
    if args.out:
        over["out_dir"] = args.out
    if args.format:
        over["format"] = args.format
    if args.subtract_accidentals:
        over["subtract_accidentals"] = True
    if args.weights:
        over["weights"] = args.weights
    if getattr(args, "dataset", None):
        over["dataset"] = args.dataset
    return config.with_overrides(**over)


def _emit(report, config: RunConfig, quiet: bool) -> None:
    emit_report(report, config.out_dir, config.format)
    if not quiet:
        print(render_table(report) if config.format == "table" else render_kv(report), end="")


def run(args: argparse.Namespace) -> int:
    config = _build_config(args)
    out = Path(config.out_dir)
    if args.command == "simulate":
        dataset = simulate(config)
        path = save_dataset(dataset, config.dataset or out / "dataset.csv")
        (out / "config.ini").write_text(config.to_ini(), encoding="utf-8")
        print(path)
    elif args.command == "analyze":
        _emit(analyze(config), config, args.quiet)
    elif args.command == "roundtrip":
        dataset, report = roundtrip(config)
        save_dataset(dataset, config.dataset or out / "dataset.csv")
        _emit(report, config, args.quiet)
    elif args.command == "demo":
        datasets, report = demo(config)
        for exp, ds in zip(report.experiments, datasets):
            save_dataset(ds, out / f"dataset_{exp.reference_label}.csv")
        _emit(report, replace(config, mode="demo"), args.quiet)
    return 0


def cli_main(argv: list[str] | None = None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return run(args)
    except (ValueError, OSError, KeyError, ZeroDivisionError) as exc:
        print(f"etpa-lab: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main())

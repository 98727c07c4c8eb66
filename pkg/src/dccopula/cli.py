"""Command-line interface: ingest, fit, sweep, report.

Option precedence: defaults < config file (--config) < environment
variables (DCCOPULA_*) < explicit command-line flags.
"""

from __future__ import annotations

import argparse
import os
import sys

from .errors import DccopulaError
from .pipeline import (
    ALL_METHODS,
    PipelineConfig,
    build_config,
    env_overrides,
    load_config_file,
    run_fit,
    run_ingest,
    run_report,
    run_sweep,
)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key = value configuration file")
    parser.add_argument("--data", help="delimited rate file with a date column")
    parser.add_argument("--assets", help="comma-separated asset subset, in order")
    parser.add_argument("--inverse", help="assets ingested as reciprocal levels")
    parser.add_argument("--split", help="first out-of-sample date (ISO-8601)")
    parser.add_argument(
        "--decomp",
        help=f"comma-separated decompositions from {ALL_METHODS} or 'all'",
    )
    parser.add_argument("--tau", help="eigen-sort window length")
    parser.add_argument("--menu", help="comma-separated distribution menu items")
    parser.add_argument("--families", help="pair-copula family codes for the sweep")
    parser.add_argument("--pivots", help="pair-copula pivots for the sweep, e.g. 1,2,3")
    parser.add_argument("--seed", help="base random seed")
    parser.add_argument("--jobs", help="parallel workers (0 = all cores)")
    parser.add_argument("--out", help="artifact output directory")
    parser.add_argument("--delimiter", help="input field delimiter")
    parser.add_argument("--group-label", dest="group_label", help="label prefix for pair rows")
    parser.add_argument("--resamples", help="bootstrap resample count")
    parser.add_argument("--sweep-maxiter", dest="sweep_maxiter", help="optimizer budget per sweep fit")
    parser.add_argument(
        "--no-figures",
        dest="figures",
        action="store_const",
        const="false",
        help="skip figure rendering in the report step",
    )


def _build(args: argparse.Namespace) -> PipelineConfig:
    cli_layer = {
        key: value
        for key, value in vars(args).items()
        if key not in ("command", "config") and value is not None
    }
    file_layer = load_config_file(args.config) if args.config else {}
    return build_config(file_layer, env_overrides(), cli_layer)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="dccopula",
        description="Copula-DCC-GARCH estimation, decomposition comparison, and reporting",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("ingest", "validate rate data and emit returns, statistics, and correlations"),
        ("fit", "three-stage estimation plus residual-distribution fits"),
        ("sweep", "enumerate and fit all pair-copula specs for one decomposition"),
        ("report", "assemble plot-ready tables and figures from artifacts"),
    ):
        _add_common(sub.add_parser(name, help=help_text))
    args = parser.parse_args(argv)

    try:
        config = _build(args)
        runner = {
            "ingest": run_ingest,
            "fit": run_fit,
            "sweep": run_sweep,
            "report": run_report,
        }[args.command]
        runner(config)
    except DccopulaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        out = getattr(args, "out", None) or os.environ.get("DCCOPULA_OUT")
        if out and os.path.isdir(out):
            with open(os.path.join(out, ".failed"), "w", encoding="utf-8") as fh:
                fh.write(f"{args.command}: {exc}\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

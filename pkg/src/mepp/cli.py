"""``mepp`` command line."""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from .backtest import default_workers
from .entropy_core import lz_entropy_rate, lz76_pattern_count
from .fixtures import write_fixture
from .market_data import PriceDataError
from .mepp_predictor import mepp_predict
from .reporting import (
    EXIT_FAILURES,
    EXIT_NO_INPUT,
    EXIT_OK,
    NoValidInputError,
    RunConfig,
    config_from_manifest,
    load_series,
    run_pipeline,
)

log = logging.getLogger("mepp")


def _mu_range(text):
    try:
        parts = [int(p) for p in text.split(":")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad mu range {text!r}") from None
    if len(parts) == 1:
        parts = [parts[0], parts[0], 1]
    elif len(parts) == 2:
        parts.append(10)
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("mu range is MIN:MAX[:STEP]")
    return tuple(parts)


def _bool_flag(parser, name, help):
    group = parser.add_mutually_exclusive_group()
    group.add_argument(f"--{name}", dest=name.replace("-", "_"), action="store_true", default=None, help=help)
    group.add_argument(f"--keep-{name.split('-', 1)[1]}", dest=name.replace("-", "_"), action="store_false")


def build_parser():
    p = argparse.ArgumentParser(prog="mepp", description="Entropy-rate estimation and MEPP backtests.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="backtest every CSV in a directory")
    run.add_argument("--input-dir")
    run.add_argument("--manifest", help="re-run the configuration recorded in a manifest")
    run.add_argument("--mode", choices=["daily", "intraday"], default="daily")
    run.add_argument("--omega", type=int, default=4)
    run.add_argument("--mu", type=_mu_range, default=(20, 100, 10), help="MIN:MAX:STEP (default 20:100:10)")
    run.add_argument("--tau", type=int, default=1)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--out", default=None)
    run.add_argument("--format", choices=["csv", "json", "both"], default="both")
    run.add_argument("--strict", action="store_true")
    run.add_argument("--workers", type=int, default=None, help="default: MEPP_THREADS or CPU count")
    run.add_argument("--tie-credit", choices=["first_symbol", "fractional"], default="first_symbol")
    run.add_argument("--denominator", choices=["scored", "n_minus_mu"], default="scored")
    run.add_argument("--hist-bins", type=int, default=50)
    run.add_argument("--price-column", default="close")
    run.add_argument("--timestamp-column", default="timestamp")
    _bool_flag(run, "drop-zero-returns", "remove exact zero returns (default: on for intraday)")

    pred = sub.add_parser("predict", help="MEPP prediction for one window")
    pred.add_argument("--window", required=True, help="comma separated symbols in 1..omega")
    pred.add_argument("--omega", type=int, default=4)

    ent = sub.add_parser("entropy", help="whole-series entropy rate of one file")
    ent.add_argument("--file", required=True)
    ent.add_argument("--omega", type=int, default=4)
    ent.add_argument("--mode", choices=["daily", "intraday"], default="daily")
    ent.add_argument("--tau", type=int, default=1)
    ent.add_argument("--price-column", default="close")
    ent.add_argument("--timestamp-column", default="timestamp")

    syn = sub.add_parser("synth", help="write synthetic fixture files")
    syn.add_argument("--kind", choices=["iid", "mepp"], required=True)
    syn.add_argument("--n", type=int, default=5000)
    syn.add_argument("--omega", type=int, default=4)
    syn.add_argument("--seed", type=int, default=0)
    syn.add_argument("--count", type=int, default=10)
    syn.add_argument("--mu", type=int, default=20, help="generation window for --kind mepp")
    syn.add_argument("--symbols", action="store_true", help="write iid symbols instead of prices")
    syn.add_argument("--out", required=True)
    return p


def _cmd_run(args):
    if args.manifest:
        config = config_from_manifest(args.manifest, args.out)
    else:
        if not args.input_dir:
            log.error("run needs --input-dir or --manifest")
            return EXIT_NO_INPUT
        mu_min, mu_max, mu_step = args.mu
        config = RunConfig(
            input_dir=args.input_dir,
            mode=args.mode,
            omega=args.omega,
            mu_min=mu_min,
            mu_max=mu_max,
            mu_step=mu_step,
            tau=args.tau,
            seed=args.seed,
            output_dir=args.out or "mepp_out",
            format=args.format,
            drop_zero_returns=args.drop_zero_returns,
            tie_credit_mode=args.tie_credit,
            denominator=args.denominator,
            hist_bins=args.hist_bins,
            timestamp_column=args.timestamp_column,
            price_column=args.price_column,
            strict=args.strict,
        )
    workers = args.workers or default_workers()
    try:
        report, manifest, code = run_pipeline(config, workers)
    except NoValidInputError as exc:
        log.error("%s", exc)
        return EXIT_NO_INPUT
    except PriceDataError as exc:
        log.error("%s", exc)
        return EXIT_FAILURES
    for f in manifest["failures"]:
        log.warning("skipped %s: %s", f["file"], f["error"])
    print(json.dumps({
        "output_dir": config.output_dir,
        "n_stocks": len(report.per_stock),
        "mean_psi": report.mean_psi,
        "std_psi": report.std_psi,
        "pearson_psi_vs_h": report.pearson_psi_vs_h,
        "failures": len(manifest["failures"]),
    }, indent=2))
    return code


def _cmd_predict(args):
    try:
        window = [int(x) for x in args.window.split(",") if x.strip()]
        pred = mepp_predict(window, args.omega)
    except ValueError as exc:
        log.error("%s", exc)
        return EXIT_FAILURES
    print(json.dumps(pred.to_dict(), indent=2))
    return EXIT_OK


def _cmd_entropy(args):
    config = RunConfig(
        input_dir=".",
        mode=args.mode,
        omega=args.omega,
        tau=args.tau,
        timestamp_column=args.timestamp_column,
        price_column=args.price_column,
    )
    try:
        series = load_series(args.file, config)
        est = lz_entropy_rate(series)
    except (PriceDataError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_FAILURES
    print(json.dumps({
        "instrument_id": series.instrument_id,
        "omega": series.omega,
        "n": est.n,
        "h_hat": est.h_hat,
        "lambda_sum": est.lambda_sum,
        "lz76_patterns": lz76_pattern_count(series),
        "state_counts": [int(c) for c in np.bincount(series.codes, minlength=series.omega)],
    }, indent=2))
    return EXIT_OK


def _cmd_synth(args):
    paths = write_fixture(args.kind, args.out, args.count, args.n, args.omega, args.seed, args.mu, args.symbols)
    print(json.dumps([str(p) for p in paths], indent=2))
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    handler = {"run": _cmd_run, "predict": _cmd_predict, "entropy": _cmd_entropy, "synth": _cmd_synth}
    return handler[args.command](args)


if __name__ == "__main__":
    sys.exit(main())

"""Pipeline orchestration and report artifacts."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .backtest import BacktestConfig, CohortReport, cohort_report, run_cohort_backtest
from .discretizer import DiscretizationSpec, SymbolSeries, discretize_global
from .market_data import CsvLayout, PriceDataError, ReturnSpec, compute_log_returns, load_price_csv

log = logging.getLogger(__name__)

MANIFEST_VERSION = 1
EXIT_OK, EXIT_FAILURES, EXIT_NO_INPUT = 0, 1, 2


class NoValidInputError(RuntimeError):
    pass


@dataclass
class RunConfig:
    input_dir: str
    mode: str = "daily"
    omega: int = 4
    mu_min: int = 20
    mu_max: int = 100
    mu_step: int = 10
    tau: int = 1
    seed: int = 0
    output_dir: str = "mepp_out"
    format: str = "both"
    drop_zero_returns: bool | None = None
    tie_credit_mode: str = "first_symbol"
    denominator: str = "scored"
    hist_bins: int = 50
    timestamp_column: str = "timestamp"
    price_column: str = "close"
    symbol_column: str = "symbol"
    strict: bool = False

    def __post_init__(self):
        if self.mode not in ("daily", "intraday"):
            raise ValueError("mode must be 'daily' or 'intraday'")
        if self.format not in ("csv", "json", "both"):
            raise ValueError("format must be csv, json or both")
        if self.mu_min < 2 or self.mu_min > self.mu_max or self.mu_step < 1:
            raise ValueError("need 2 <= mu_min <= mu_max and mu_step >= 1")
        if self.omega < 2:
            raise ValueError("omega must be >= 2")
        if self.tau < 1:
            raise ValueError("tau must be >= 1")

    @property
    def mu_grid(self):
        return tuple(range(self.mu_min, self.mu_max + 1, self.mu_step))

    @property
    def drop_zeros(self):
        if self.drop_zero_returns is None:
            return self.mode == "intraday"
        return self.drop_zero_returns

    def backtest_config(self):
        return BacktestConfig(
            mu_grid=self.mu_grid,
            omega=self.omega,
            tie_credit_mode=self.tie_credit_mode,
            denominator=self.denominator,
            hist_bins=self.hist_bins,
        )

    def echo(self):
        """Config as recorded in the manifest (output location excluded)."""
        d = asdict(self)
        d.pop("output_dir")
        return d

    @classmethod
    def from_echo(cls, d, **overrides):
        names = {f.name for f in fields(cls)}
        kwargs = {k: v for k, v in d.items() if k in names}
        kwargs.update(overrides)
        return cls(**kwargs)


def _sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _header(path):
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return next(csv.reader(fh), [])


def load_symbol_csv(path, omega: int, column: str = "symbol", instrument_id: str | None = None) -> SymbolSeries:
    """Read an already-discretised series (one integer symbol per row)."""
    path = Path(path)
    symbols = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            try:
                symbols.append(int(row[column]))
            except (TypeError, ValueError):
                raise PriceDataError(f"{path}: malformed symbol at line {reader.line_num}") from None
    try:
        return SymbolSeries(instrument_id or path.stem, np.array(symbols, dtype=np.int32), omega)
    except ValueError as exc:
        raise PriceDataError(f"{path}: {exc}") from None


def load_series(path, config: RunConfig) -> SymbolSeries:
    """Price file -> log returns -> global quantile symbols.

    Files carrying a ``symbol`` column skip returns and discretisation.
    """
    if config.symbol_column in _header(path):
        return load_symbol_csv(path, config.omega, config.symbol_column)
    prices = load_price_csv(path, CsvLayout(config.timestamp_column, config.price_column))
    returns = compute_log_returns(prices, ReturnSpec(config.tau, config.drop_zeros))
    return discretize_global(returns, DiscretizationSpec(config.omega))


def _fmt(x):
    return f"{x:.6g}"


def _csv_bytes(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue().encode("utf-8")


def render_artifacts(report: CohortReport, fmt: str = "both") -> dict[str, bytes]:
    """All report files as ``name -> bytes``; nothing touches the disk."""
    out = {}
    if fmt in ("json", "both"):
        out["cohort.json"] = (json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n").encode()
    if fmt in ("csv", "both"):
        grid = report.mu_grid
        out["per_stock.csv"] = _csv_bytes(
            ["instrument_id", "n", "mu", "psi", "whole_series_h", "tie_rate"],
            [
                [s.instrument_id, s.n, mu, _fmt(s.psi_by_mu[mu]), _fmt(s.whole_series_h), _fmt(s.tie_rate_by_mu[mu])]
                for s in report.per_stock
                for mu in grid
            ],
        )
        below = report.below_threshold_counts
        out["psi_vs_mu.csv"] = _csv_bytes(
            ["mu", "mean_psi", "std_psi", "unadjusted_threshold", "adjusted_threshold", "below_unadjusted", "below_adjusted"],
            [
                [
                    mu,
                    _fmt(report.psi_mean_by_mu[mu]),
                    _fmt(report.psi_std_by_mu[mu]),
                    _fmt(report.thresholds["unadjusted"][mu]),
                    _fmt(report.thresholds["adjusted"][mu]),
                    below["unadjusted"]["by_mu"][mu],
                    below["adjusted"]["by_mu"][mu],
                ]
                for mu in grid
            ],
        )
        edges, counts = report.psi_histogram["edges"], report.psi_histogram["counts"]
        out["psi_histogram.csv"] = _csv_bytes(
            ["bin_left", "bin_right", "count"],
            [[_fmt(edges[i]), _fmt(edges[i + 1]), c] for i, c in enumerate(counts)],
        )
        out["threshold_lines.csv"] = _csv_bytes(
            ["kind", "psi_mean_line", "stocks_below"],
            [[k, _fmt(v["psi_mean_line"]), v["psi_mean_below"]] for k, v in below.items()],
        )
        fit = report.fit_psi_vs_h or {}
        out["scatter_psi_vs_h.csv"] = _csv_bytes(
            ["instrument_id", "whole_series_h", "psi_mean", "fit_psi"],
            [
                [
                    s.instrument_id,
                    _fmt(s.whole_series_h),
                    _fmt(s.psi_mean),
                    _fmt(fit["intercept"] + fit["slope"] * s.whole_series_h) if fit else "",
                ]
                for s in report.per_stock
            ],
        )
        out["scatter_psi_vs_n.csv"] = _csv_bytes(
            ["instrument_id", "n", "psi_mean"],
            [[s.instrument_id, s.n, _fmt(s.psi_mean)] for s in report.per_stock],
        )
    return out


def run_pipeline(config: RunConfig, workers: int | None = None):
    """Ingest, backtest and write every artifact plus ``manifest.json``.

    Returns ``(report, manifest, exit_code)``. Raises
    :class:`NoValidInputError` when nothing could be loaded.
    """
    in_dir = Path(config.input_dir)
    files = sorted(in_dir.glob("*.csv")) if in_dir.is_dir() else []
    bt_config = config.backtest_config()
    series, failures, inputs = [], [], []
    for path in files:
        try:
            s = load_series(path, config)
            if len(s) <= bt_config.mu_grid[-1] + 1:
                raise PriceDataError(f"{path}: {len(s)} symbols is too short for mu={bt_config.mu_grid[-1]}")
        except (PriceDataError, ValueError) as exc:
            failures.append({"file": path.name, "error": str(exc)})
            log.warning("skipping %s: %s", path.name, exc)
            continue
        series.append(s)
        inputs.append({"file": path.name, "sha256": _sha256(path), "n_symbols": len(s)})

    if not series:
        raise NoValidInputError(f"no valid input series in {in_dir}")
    if failures and config.strict:
        raise PriceDataError(f"{len(failures)} input file(s) failed: " + "; ".join(f["error"] for f in failures))

    stocks = run_cohort_backtest(series, bt_config, workers)
    report = cohort_report(stocks, bt_config)
    artifacts = render_artifacts(report, config.format)

    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, data in artifacts.items():
        (out_dir / name).write_bytes(data)
    manifest = {
        "manifest_version": MANIFEST_VERSION,
        "config": config.echo(),
        "inputs": inputs,
        "failures": failures,
        "artifacts": {name: hashlib.sha256(data).hexdigest() for name, data in sorted(artifacts.items())},
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return report, manifest, EXIT_OK


def config_from_manifest(path, output_dir: str | None = None) -> RunConfig:
    path = Path(path)
    manifest = json.loads(path.read_text())
    return RunConfig.from_echo(manifest["config"], output_dir=output_dir or str(path.parent))

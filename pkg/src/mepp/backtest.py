"""Sliding-window MEPP backtest, chance thresholds and cohort statistics."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .discretizer import SymbolSeries
from .entropy_core import lz_entropy_rate

TIE_CREDIT_MODES = ("first_symbol", "fractional")
DENOMINATORS = ("scored", "n_minus_mu")
DEFAULT_MU_GRID = tuple(range(20, 101, 10))


@dataclass(frozen=True)
class BacktestConfig:
    """Backtest settings.

    ``denominator="scored"`` divides hits by the number of scored positions
    (N - mu - 1, the window holds mu + 1 symbols); ``"n_minus_mu"`` divides by
    N - mu instead.
    """

    mu_grid: tuple[int, ...] = DEFAULT_MU_GRID
    omega: int = 4
    tie_credit_mode: str = "first_symbol"
    denominator: str = "scored"
    hist_bins: int = 50

    def __post_init__(self):
        grid = tuple(sorted({int(m) for m in self.mu_grid}))
        if not grid or grid[0] < 2:
            raise ValueError("mu grid must be non-empty with every mu >= 2")
        if self.omega < 2:
            raise ValueError("omega must be >= 2")
        if self.tie_credit_mode not in TIE_CREDIT_MODES:
            raise ValueError(f"tie_credit_mode must be one of {TIE_CREDIT_MODES}")
        if self.denominator not in DENOMINATORS:
            raise ValueError(f"denominator must be one of {DENOMINATORS}")
        object.__setattr__(self, "mu_grid", grid)


@dataclass(frozen=True)
class MuResult:
    mu: int
    hits: int
    fractional_hits: float
    ties: int
    scored: int


@dataclass
class StockBacktest:
    instrument_id: str
    n: int
    psi_by_mu: dict[int, float]
    psi_mean: float
    psi_std: float
    whole_series_h: float
    tie_rate: float
    tie_rate_by_mu: dict[int, float] = field(default_factory=dict)
    scored_by_mu: dict[int, int] = field(default_factory=dict)
    hits_by_mu: dict[int, int] = field(default_factory=dict)
    state_counts: list[int] = field(default_factory=list)

    def to_dict(self):
        return {
            "instrument_id": self.instrument_id,
            "n": self.n,
            "psi_by_mu": {str(m): v for m, v in self.psi_by_mu.items()},
            "psi_mean": self.psi_mean,
            "psi_std": self.psi_std,
            "whole_series_h": self.whole_series_h,
            "tie_rate": self.tie_rate,
            "tie_rate_by_mu": {str(m): v for m, v in self.tie_rate_by_mu.items()},
            "scored_by_mu": {str(m): v for m, v in self.scored_by_mu.items()},
            "hits_by_mu": {str(m): v for m, v in self.hits_by_mu.items()},
            "state_counts": list(self.state_counts),
        }


def _mean(values):
    values = list(values)
    return math.fsum(values) / len(values)


def _std(values):
    # population std; fsum keeps the result independent of input order
    values = list(values)
    m = _mean(values)
    return math.sqrt(math.fsum((v - m) ** 2 for v in values) / len(values))


def unadjusted_threshold(omega: int) -> float:
    if omega < 2:
        raise ValueError("omega must be >= 2")
    return 1.0 / omega


def adjusted_threshold(n_avg: float, omega: int, mu: int) -> float:
    """Chance hit rate allowing for global discretisation: (N/omega)/(N-mu)."""
    if omega < 2:
        raise ValueError("omega must be >= 2")
    if n_avg <= mu:
        raise ValueError(f"n_avg={n_avg} must exceed mu={mu}")
    # single rounding, so mu = 0 gives exactly 1/omega
    return n_avg / (omega * (n_avg - mu))


def pearson_correlation(x, y) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or len(x) < 2:
        raise ValueError("pearson needs two equally long sequences of length >= 2")
    dx = x - x.mean()
    dy = y - y.mean()
    sx, sy = np.abs(dx).max(), np.abs(dy).max()
    if sx == 0.0 or sy == 0.0:
        raise ValueError("correlation is undefined for a constant input")
    # rescale so squares cannot underflow
    dx, dy = dx / sx, dy / sy
    sxx = math.fsum(dx * dx)
    syy = math.fsum(dy * dy)
    r = math.fsum(dx * dy) / (math.sqrt(sxx) * math.sqrt(syy))
    return max(-1.0, min(1.0, r))


def _check_length(symbols: SymbolSeries, config: BacktestConfig):
    top = config.mu_grid[-1]
    if len(symbols) <= top + 1:
        raise ValueError(
            f"{symbols.instrument_id}: series of length {len(symbols)} is too short for mu={top}"
        )


def score_window(symbols: SymbolSeries, mu: int) -> MuResult:
    """Run the sliding-window predictor at one window length."""
    codes = np.ascontiguousarray(symbols.codes, dtype=np.int32)
    hits, frac, ties, scored = kernels.backtest_window(codes, int(symbols.omega), int(mu))
    return MuResult(int(mu), int(hits), float(frac), int(ties), int(scored))


def assemble_stock(symbols: SymbolSeries, results, whole_series_h: float, config: BacktestConfig) -> StockBacktest:
    n = len(symbols)
    by_mu = {r.mu: r for r in results}
    psi, tie_rate = {}, {}
    for mu in config.mu_grid:
        r = by_mu[mu]
        credit = r.hits if config.tie_credit_mode == "first_symbol" else r.fractional_hits
        denom = r.scored if config.denominator == "scored" else n - mu
        psi[mu] = credit / denom
        tie_rate[mu] = r.ties / r.scored
    total_scored = sum(by_mu[m].scored for m in config.mu_grid)
    return StockBacktest(
        instrument_id=symbols.instrument_id,
        n=n,
        psi_by_mu=psi,
        psi_mean=_mean(psi.values()),
        psi_std=_std(psi.values()),
        whole_series_h=whole_series_h,
        tie_rate=sum(by_mu[m].ties for m in config.mu_grid) / total_scored,
        tie_rate_by_mu=tie_rate,
        scored_by_mu={m: by_mu[m].scored for m in config.mu_grid},
        hits_by_mu={m: by_mu[m].hits for m in config.mu_grid},
        state_counts=[int(c) for c in symbols.state_counts()],
    )


def run_stock_backtest(symbols: SymbolSeries, config: BacktestConfig | None = None) -> StockBacktest:
    config = config or BacktestConfig(omega=symbols.omega)
    _check_length(symbols, config)
    results = [score_window(symbols, mu) for mu in config.mu_grid]
    return assemble_stock(symbols, results, lz_entropy_rate(symbols).h_hat, config)


def default_workers() -> int:
    env = os.environ.get("MEPP_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_cohort_backtest(series, config: BacktestConfig, workers: int | None = None) -> list[StockBacktest]:
    """Backtest many series over a pool of (stock, mu) tasks.

    Kernels release the GIL, so threads run them in parallel. Results are
    merged by instrument id and mu, hence independent of the schedule.
    """
    series = sorted(series, key=lambda s: s.instrument_id)
    ids = [s.instrument_id for s in series]
    if len(set(ids)) != len(ids):
        raise ValueError("instrument ids must be unique")
    for s in series:
        _check_length(s, config)
    workers = workers or default_workers()

    tasks = [(i, mu) for i in range(len(series)) for mu in config.mu_grid]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        h_futs = [pool.submit(lz_entropy_rate, s) for s in series]
        mu_futs = {t: pool.submit(score_window, series[t[0]], t[1]) for t in tasks}
        whole_h = [f.result().h_hat for f in h_futs]
        results = {t: f.result() for t, f in mu_futs.items()}

    return [
        assemble_stock(s, [results[(i, mu)] for mu in config.mu_grid], whole_h[i], config)
        for i, s in enumerate(series)
    ]


@dataclass
class CohortReport:
    per_stock: list[StockBacktest]
    omega: int
    mu_grid: tuple[int, ...]
    n_avg: float
    mean_psi: float
    std_psi: float
    psi_mean_by_mu: dict[int, float]
    psi_std_by_mu: dict[int, float]
    thresholds: dict[str, dict[int, float]]
    below_threshold_counts: dict[str, dict]
    pearson_psi_vs_h: float | None
    pearson_psi_vs_n: float | None
    fit_psi_vs_h: dict | None
    psi_histogram: dict
    mean_tie_rate: float
    notes: list[str] = field(default_factory=list)

    def to_dict(self):
        def keyed(d):
            return {str(k): v for k, v in d.items()}

        below = {}
        for kind, v in self.below_threshold_counts.items():
            below[kind] = {k: (keyed(x) if k == "by_mu" else x) for k, x in v.items()}
        return {
            "omega": self.omega,
            "mu_grid": list(self.mu_grid),
            "n_stocks": len(self.per_stock),
            "n_avg": self.n_avg,
            "mean_psi": self.mean_psi,
            "std_psi": self.std_psi,
            "psi_mean_by_mu": keyed(self.psi_mean_by_mu),
            "psi_std_by_mu": keyed(self.psi_std_by_mu),
            "thresholds": {k: keyed(v) for k, v in self.thresholds.items()},
            "below_threshold_counts": below,
            "pearson_psi_vs_h": self.pearson_psi_vs_h,
            "pearson_psi_vs_n": self.pearson_psi_vs_n,
            "fit_psi_vs_h": self.fit_psi_vs_h,
            "psi_histogram": self.psi_histogram,
            "mean_tie_rate": self.mean_tie_rate,
            "notes": list(self.notes),
            "per_stock": [s.to_dict() for s in self.per_stock],
        }


def _linear_fit(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    dx = x - x.mean()
    sxx = math.fsum(dx * dx)
    if sxx == 0.0:
        return None
    slope = math.fsum(dx * (y - y.mean())) / sxx
    return {"slope": slope, "intercept": float(y.mean() - slope * x.mean())}


def cohort_report(stocks, config: BacktestConfig) -> CohortReport:
    """Aggregate per-stock results the way the result figures need them."""
    stocks = sorted(stocks, key=lambda s: s.instrument_id)
    if not stocks:
        raise ValueError("empty cohort")
    grid = config.mu_grid
    notes = []
    n_avg = _mean(s.n for s in stocks)
    unadj = unadjusted_threshold(config.omega)
    adj = {mu: adjusted_threshold(n_avg, config.omega, mu) for mu in grid}
    thresholds = {"unadjusted": {mu: unadj for mu in grid}, "adjusted": adj}

    below = {}
    for kind, per_mu in thresholds.items():
        by_mu = {mu: sum(s.psi_by_mu[mu] < per_mu[mu] for s in stocks) for mu in grid}
        # stocks whose mu-averaged psi sits below the mu-averaged threshold
        avg_line = _mean(per_mu.values())
        below[kind] = {
            "mean": _mean(by_mu.values()),
            "min": min(by_mu.values()),
            "max": max(by_mu.values()),
            "by_mu": by_mu,
            "psi_mean_line": avg_line,
            "psi_mean_below": sum(s.psi_mean < avg_line for s in stocks),
        }

    psi = [s.psi_mean for s in stocks]
    hs = [s.whole_series_h for s in stocks]
    ns = [s.n for s in stocks]

    def safe_pearson(x, y, label):
        try:
            return pearson_correlation(x, y)
        except ValueError as exc:
            notes.append(f"pearson {label} undefined: {exc}")
            return None

    counts, edges = np.histogram(psi, bins=config.hist_bins, range=(0.0, 1.0))
    return CohortReport(
        per_stock=stocks,
        omega=config.omega,
        mu_grid=grid,
        n_avg=n_avg,
        mean_psi=_mean(psi),
        std_psi=_std(psi),
        psi_mean_by_mu={mu: _mean(s.psi_by_mu[mu] for s in stocks) for mu in grid},
        psi_std_by_mu={mu: _std(s.psi_by_mu[mu] for s in stocks) for mu in grid},
        thresholds=thresholds,
        below_threshold_counts=below,
        pearson_psi_vs_h=safe_pearson(psi, hs, "psi vs h"),
        pearson_psi_vs_n=safe_pearson(psi, ns, "psi vs n"),
        fit_psi_vs_h=_linear_fit(hs, psi),
        psi_histogram={"edges": [float(e) for e in edges], "counts": [int(c) for c in counts]},
        mean_tie_rate=_mean(s.tie_rate for s in stocks),
        notes=notes,
    )


def generate_iid_series(n: int, omega: int, seed: int, instrument_id: str | None = None) -> SymbolSeries:
    """Uniform IID symbols from a seeded PCG64 stream."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    symbols = rng.integers(1, omega + 1, size=n, dtype=np.int32)
    return SymbolSeries(instrument_id or f"iid_{seed}", symbols, omega)


def generate_mepp_series(
    n: int,
    omega: int,
    seed: int,
    warmup: int,
    window: int | None = None,
    instrument_id: str | None = None,
) -> SymbolSeries:
    """Series that follows the MEPP prediction at every step after ``warmup``.

    With ``window=mu`` each symbol is predicted from the preceding ``mu + 1``
    symbols, matching the backtest; otherwise from the whole history.
    Use ``warmup >= window + 1`` so every scored backtest window has seen
    exactly the generating context.
    """
    if warmup < 2 or n <= warmup:
        raise ValueError("need warmup >= 2 and n > warmup")
    if window is not None and window < 1:
        raise ValueError("window must be >= 1")
    init = generate_iid_series(warmup, omega, seed).codes.astype(np.int32)
    codes = kernels.generate_mepp(init, int(n), int(omega), -1 if window is None else int(window))
    return SymbolSeries(instrument_id or f"mepp_{seed}", codes + 1, omega)

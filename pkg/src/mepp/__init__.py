"""Lempel-Ziv entropy rates of discretised returns and MEPP backtests."""

from ._jit import USE_NUMBA
from .backtest import (
    BacktestConfig,
    CohortReport,
    StockBacktest,
    adjusted_threshold,
    cohort_report,
    generate_iid_series,
    generate_mepp_series,
    pearson_correlation,
    run_cohort_backtest,
    run_stock_backtest,
    unadjusted_threshold,
)
from .discretizer import DiscretizationSpec, SymbolSeries, Thresholds, discretize, discretize_global, quantile_thresholds
from .entropy_core import (
    EntropyEstimate,
    lz76_parse,
    lz76_pattern_count,
    lz_entropy_rate,
    match_lengths,
    shannon_entropy,
)
from .fixtures import fixture_dir
from .market_data import CsvLayout, LogReturnSeries, PriceSeries, ReturnSpec, compute_log_returns, load_price_csv
from .mepp_predictor import Prediction, candidate_entropies, mepp_predict

__version__ = "0.1.0"

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_match_lengths
from mepp.backtest import (
    BacktestConfig,
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
from mepp.discretizer import SymbolSeries
from mepp.entropy_core import lz_entropy_rate


@pytest.mark.parametrize("omega, expected", [(4, 0.25), (2, 0.5), (10, 0.1)])
def test_unadjusted(omega, expected):
    assert unadjusted_threshold(omega) == expected


def test_adjusted_examples():
    assert adjusted_threshold(1000, 4, 100) == pytest.approx(250 / 900, abs=1e-15)
    assert adjusted_threshold(1000, 4, 0) == 0.25
    assert adjusted_threshold(1000, 4, 100) > adjusted_threshold(1000, 4, 20)
    with pytest.raises(ValueError):
        adjusted_threshold(100, 4, 100)


@settings(max_examples=200, deadline=None)
@given(st.integers(101, 10**6), st.integers(2, 16), st.integers(0, 100))
def test_adjusted_not_below_unadjusted(n, omega, mu):
    adj = adjusted_threshold(n, omega, mu)
    assert adj >= unadjusted_threshold(omega)
    assert (adj == unadjusted_threshold(omega)) == (mu == 0)
    assert adj > 0
    if mu < n - n / omega:
        assert adj < 1


@pytest.mark.parametrize(
    "x, y, r",
    [([1, 2, 3], [2, 4, 6], 1.0), ([1, 2, 3], [3, 2, 1], -1.0), ([1, 2, 3, 4], [1, 3, 2, 4], 0.8)],
)
def test_pearson_examples(x, y, r):
    assert pearson_correlation(x, y) == pytest.approx(r, abs=1e-12)


def test_pearson_constant_input_errors():
    with pytest.raises(ValueError, match="constant"):
        pearson_correlation([1, 1, 1], [1, 2, 3])
    with pytest.raises(ValueError):
        pearson_correlation([1], [2])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-100, 100, allow_nan=False), min_size=2, max_size=30),
       st.lists(st.floats(-100, 100, allow_nan=False), min_size=2, max_size=30))
def test_pearson_range(x, y):
    k = min(len(x), len(y))
    x, y = x[:k], y[:k]
    if len(set(x)) > 1:
        assert pearson_correlation(x, x) == pytest.approx(1.0, abs=1e-12)
    try:
        r = pearson_correlation(x, y)
    except ValueError:
        return
    assert -1.0 <= r <= 1.0


def naive_hits(symbols, omega, mu):
    """Backtest from scratch: brute-force match lengths, float argmax."""
    s = list(symbols)
    hits = scored = 0
    for t in range(mu, len(s) - 1):
        window = s[t - mu : t + 1]
        best, best_h = None, -1.0
        for a in range(1, omega + 1):
            ext = window + [a]
            m = len(ext)
            h = m * math.log2(m) / sum(brute_match_lengths(ext))
            if h > best_h:
                best, best_h = a, h
        hits += best == s[t + 1]
        scored += 1
    return hits, scored


def test_engine_matches_naive_backtest(rng):
    cfg = BacktestConfig(mu_grid=(2, 5, 12), omega=3)
    for k in range(20):
        n = int(rng.integers(20, 120))
        omega = 3 if k % 2 else 2
        symbols = rng.integers(1, omega + 1, n)
        s = SymbolSeries(f"s{k}", symbols, omega)
        res = run_stock_backtest(s, BacktestConfig(mu_grid=cfg.mu_grid, omega=omega))
        for mu in cfg.mu_grid:
            assert (res.hits_by_mu[mu], res.scored_by_mu[mu]) == naive_hits(symbols, omega, mu)


def test_scored_count_and_denominators():
    s = generate_iid_series(400, 4, 3)
    grid = (20, 50, 100)
    scored = run_stock_backtest(s, BacktestConfig(mu_grid=grid))
    alt = run_stock_backtest(s, BacktestConfig(mu_grid=grid, denominator="n_minus_mu"))
    for mu in grid:
        assert scored.scored_by_mu[mu] == len(s) - mu - 1
        assert scored.psi_by_mu[mu] == scored.hits_by_mu[mu] / (len(s) - mu - 1)
        assert alt.psi_by_mu[mu] == scored.hits_by_mu[mu] / (len(s) - mu)
    assert scored.psi_mean == pytest.approx(np.mean(list(scored.psi_by_mu.values())), abs=1e-15)
    assert scored.whole_series_h == lz_entropy_rate(s).h_hat


def test_fractional_credit_bounds():
    s = generate_iid_series(600, 4, 11)
    first = run_stock_backtest(s, BacktestConfig(mu_grid=(20, 40)))
    frac = run_stock_backtest(s, BacktestConfig(mu_grid=(20, 40), tie_credit_mode="fractional"))
    for mu in (20, 40):
        assert 0 <= frac.psi_by_mu[mu] <= 1
    assert first.tie_rate == frac.tie_rate


def test_series_too_short():
    with pytest.raises(ValueError):
        run_stock_backtest(generate_iid_series(100, 4, 0), BacktestConfig())


@pytest.mark.parametrize("mu", [2, 20, 60])
def test_mepp_series_scores_perfectly(mu):
    s = generate_mepp_series(400, 4, seed=mu, warmup=mu + 1, window=mu)
    res = run_stock_backtest(s, BacktestConfig(mu_grid=(mu,)))
    assert res.psi_by_mu[mu] == 1.0


def test_mepp_generator_properties():
    a = generate_mepp_series(300, 4, seed=5, warmup=10)
    b = generate_mepp_series(300, 4, seed=5, warmup=10)
    assert a.symbols.tolist() == b.symbols.tolist()
    assert lz_entropy_rate(a).h_hat > lz_entropy_rate(SymbolSeries("c", [1] * 300, 4)).h_hat
    with pytest.raises(ValueError):
        generate_mepp_series(10, 4, 0, warmup=1)
    with pytest.raises(ValueError):
        generate_mepp_series(10, 4, 0, warmup=10)


def test_mepp_full_history_follows_prediction():
    from mepp.mepp_predictor import mepp_predict

    s = generate_mepp_series(60, 3, seed=1, warmup=4).symbols.tolist()
    for i in range(4, 60):
        assert mepp_predict(s[:i], omega=3).predicted_symbol == s[i]


def test_iid_generator():
    a = generate_iid_series(1000, 4, 42)
    assert a.symbols.tolist() == generate_iid_series(1000, 4, 42).symbols.tolist()
    assert a.symbols.tolist() != generate_iid_series(1000, 4, 43).symbols.tolist()
    freq = generate_iid_series(100_000, 4, 1).state_counts() / 100_000
    assert np.all(np.abs(freq - 0.25) < 0.01)
    with pytest.raises(ValueError):
        generate_iid_series(0, 4, 0)


def _stock(i, psi, h, n=1000, grid=(20, 30)):
    return StockBacktest(f"s{i:02d}", n, {mu: psi for mu in grid}, psi, 0.0, h, 0.0)


def test_cohort_pearson_of_affine_decreasing():
    cfg = BacktestConfig(mu_grid=(20, 30))
    hs = [1.2, 1.5, 1.7, 1.9, 2.0]
    stocks = [_stock(i, 0.9 - 0.3 * h, h) for i, h in enumerate(hs)]
    rep = cohort_report(stocks, cfg)
    assert rep.pearson_psi_vs_h == pytest.approx(-1.0, abs=1e-12)
    assert rep.fit_psi_vs_h["slope"] == pytest.approx(-0.3, abs=1e-12)


def test_cohort_of_mepp_series():
    mu = 20
    cfg = BacktestConfig(mu_grid=(mu,))
    series = [generate_mepp_series(300, 4, s, mu + 1, mu, f"m{s}") for s in range(4)]
    rep = cohort_report(run_cohort_backtest(series, cfg, workers=2), cfg)
    assert rep.mean_psi == 1.0
    for kind in ("unadjusted", "adjusted"):
        assert rep.below_threshold_counts[kind]["max"] == 0
    assert rep.pearson_psi_vs_h is None or -1 <= rep.pearson_psi_vs_h <= 1


def test_cohort_of_iid_series():
    cfg = BacktestConfig(mu_grid=(20, 60, 100))
    series = [generate_iid_series(1500, 4, s, f"i{s:02d}") for s in range(16)]
    rep = cohort_report(run_cohort_backtest(series, cfg), cfg)
    assert abs(rep.mean_psi - 0.25) < 0.02
    below = rep.below_threshold_counts["unadjusted"]
    assert 2 <= below["mean"] <= 14
    assert below["max"] <= 16
    assert rep.n_avg == 1500


def test_aggregation_is_order_independent():
    series = [generate_iid_series(400, 4, s, f"i{s}") for s in range(5)]
    cfg_a = BacktestConfig(mu_grid=(20, 30, 50))
    cfg_b = BacktestConfig(mu_grid=(50, 20, 30))
    a = cohort_report(run_cohort_backtest(series, cfg_a, workers=1), cfg_a).to_dict()
    b = cohort_report(run_cohort_backtest(series[::-1], cfg_b, workers=3), cfg_b).to_dict()
    assert a == b


def test_empty_cohort():
    with pytest.raises(ValueError, match="empty"):
        cohort_report([], BacktestConfig())


def test_duplicate_ids_rejected():
    s = generate_iid_series(200, 4, 0, "dup")
    with pytest.raises(ValueError):
        run_cohort_backtest([s, s], BacktestConfig(mu_grid=(20,)))


def test_config_validation():
    with pytest.raises(ValueError):
        BacktestConfig(mu_grid=(1, 20))
    with pytest.raises(ValueError):
        BacktestConfig(tie_credit_mode="random")
    assert BacktestConfig().mu_grid == (20, 30, 40, 50, 60, 70, 80, 90, 100)

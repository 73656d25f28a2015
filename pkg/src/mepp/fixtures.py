"""Synthetic fixture files for the null and positive controls."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .backtest import generate_iid_series, generate_mepp_series

BUNDLED = Path(__file__).with_name("data")


def fixture_dir(kind: str) -> Path:
    """Directory of a bundled fixture, ``"iid"`` or ``"mepp"``."""
    path = BUNDLED / kind
    if not path.is_dir():
        raise ValueError(f"no bundled fixture {kind!r}")
    return path


def _write_rows(path, header, rows):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def iid_prices(n_returns: int, seed: int, start: float = 100.0, scale: float = 0.01) -> np.ndarray:
    """Prices whose log returns are IID Gaussian; ``n_returns + 1`` values."""
    rng = np.random.default_rng(seed)
    steps = rng.standard_normal(n_returns) * scale
    return start * np.exp(np.concatenate([[0.0], np.cumsum(steps)]))


def write_fixture(kind: str, out_dir, count: int = 10, n: int = 5000, omega: int = 4,
                  seed: int = 0, mu: int = 20, as_symbols: bool = False) -> list[Path]:
    """Write ``count`` series into ``out_dir``; seeds are ``seed .. seed+count-1``.

    ``iid`` writes price files (timestamp, close) yielding ``n`` returns, or
    IID symbols with ``as_symbols``. ``mepp`` always writes symbol files
    (timestamp, symbol) generated with window ``mu`` and warmup ``mu + 1``;
    quantile binning would not reproduce those symbols from prices.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for k in range(count):
        s = seed + k
        path = out_dir / f"{kind}_{k:03d}.csv"
        if kind == "iid" and not as_symbols:
            prices = iid_prices(n, s)
            _write_rows(path, ["timestamp", "close"], [[t, repr(float(p))] for t, p in enumerate(prices)])
        else:
            if kind == "iid":
                series = generate_iid_series(n, omega, s)
            elif kind == "mepp":
                series = generate_mepp_series(n, omega, s, warmup=mu + 1, window=mu)
            else:
                raise ValueError(f"unknown fixture kind {kind!r}")
            _write_rows(path, ["timestamp", "symbol"], [[t, int(x)] for t, x in enumerate(series.symbols)])
        written.append(path)
    return written

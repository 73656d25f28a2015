"""Price ingestion and log returns."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class PriceDataError(ValueError):
    """Raised for unreadable or invalid price input."""


@dataclass(frozen=True)
class CsvLayout:
    """Column names of a price file."""

    timestamp: str = "timestamp"
    price: str = "close"


@dataclass(frozen=True)
class PriceSeries:
    instrument_id: str
    timestamps: np.ndarray
    prices: np.ndarray

    def __post_init__(self):
        ts = np.asarray(self.timestamps, dtype=np.int64)
        px = np.asarray(self.prices, dtype=np.float64)
        if ts.shape != px.shape or ts.ndim != 1:
            raise PriceDataError("timestamps and prices must be 1-d and equally long")
        if len(px) < 2:
            raise PriceDataError("a price series needs at least 2 observations")
        if np.any(np.diff(ts) <= 0):
            raise PriceDataError("non-increasing timestamps")
        if not np.all(px > 0):
            raise PriceDataError("prices must be positive")
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "prices", px)

    def __len__(self):
        return len(self.prices)


@dataclass(frozen=True)
class ReturnSpec:
    tau: int = 1
    drop_zero_returns: bool = False

    def __post_init__(self):
        if int(self.tau) != self.tau or self.tau < 1:
            raise ValueError(f"tau must be a positive integer, got {self.tau!r}")


@dataclass(frozen=True)
class LogReturnSeries:
    instrument_id: str
    returns: np.ndarray
    spec: ReturnSpec = field(default_factory=ReturnSpec)

    def __len__(self):
        return len(self.returns)


def load_price_csv(path, layout: CsvLayout | None = None, instrument_id: str | None = None) -> PriceSeries:
    """Read one instrument from a CSV file with a header row.

    Every data row must parse; the first bad row aborts the load with its
    1-based line number in the message.
    """
    layout = layout or CsvLayout()
    path = Path(path)
    if not path.is_file():
        raise PriceDataError(f"{path}: no such file")

    timestamps, prices = [], []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = {layout.timestamp, layout.price} - set(reader.fieldnames or ())
        if missing:
            raise PriceDataError(f"{path}: missing column(s) {sorted(missing)}")
        prev = None
        for row in reader:
            line = reader.line_num
            try:
                ts = int(row[layout.timestamp])
                px = float(row[layout.price])
            except (TypeError, ValueError):
                raise PriceDataError(f"{path}: malformed row at line {line}") from None
            if not np.isfinite(px) or px <= 0:
                raise PriceDataError(f"{path}: non-positive price {row[layout.price]!r} at line {line}")
            if prev is not None and ts <= prev:
                raise PriceDataError(f"{path}: non-increasing timestamps at line {line}")
            prev = ts
            timestamps.append(ts)
            prices.append(px)

    return PriceSeries(instrument_id or path.stem, np.array(timestamps, dtype=np.int64), np.array(prices))


def compute_log_returns(series: PriceSeries, spec: ReturnSpec | None = None) -> LogReturnSeries:
    """rho_k = ln(p_k / p_{k-tau}), optionally with exact zeros removed.

    The ratio form gives exactly 0.0 iff the two prices are equal, and makes
    the result invariant to rescaling prices by a power of two.
    """
    spec = spec or ReturnSpec()
    px = series.prices
    if len(px) <= spec.tau:
        raise PriceDataError(f"{series.instrument_id}: {len(px)} prices is too short for tau={spec.tau}")
    rho = np.log(px[spec.tau:] / px[: -spec.tau])
    if spec.drop_zero_returns:
        rho = rho[rho != 0.0]
    return LogReturnSeries(series.instrument_id, rho, spec)

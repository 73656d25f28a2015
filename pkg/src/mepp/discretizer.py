"""Global quantile binning of returns into symbols 1..omega."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .market_data import LogReturnSeries


@dataclass(frozen=True)
class DiscretizationSpec:
    omega: int = 4

    def __post_init__(self):
        if int(self.omega) != self.omega or self.omega < 2:
            raise ValueError(f"omega must be an integer >= 2, got {self.omega!r}")


@dataclass(frozen=True)
class Thresholds:
    cut_points: np.ndarray

    def __post_init__(self):
        cuts = np.asarray(self.cut_points, dtype=np.float64)
        if cuts.ndim != 1 or np.any(np.diff(cuts) < 0):
            raise ValueError("cut points must be a non-decreasing 1-d sequence")
        object.__setattr__(self, "cut_points", cuts)

    @property
    def omega(self):
        return len(self.cut_points) + 1


@dataclass(frozen=True)
class SymbolSeries:
    instrument_id: str
    symbols: np.ndarray
    omega: int

    def __post_init__(self):
        sym = np.asarray(self.symbols, dtype=np.int32)
        if sym.ndim != 1:
            raise ValueError("symbols must be 1-d")
        if self.omega < 1 or (len(sym) and (sym.min() < 1 or sym.max() > self.omega)):
            raise ValueError(f"symbols must lie in 1..{self.omega}")
        object.__setattr__(self, "symbols", sym)

    def __len__(self):
        return len(self.symbols)

    @property
    def codes(self):
        """Zero-based int32 codes used by the kernels."""
        return self.symbols - 1

    def state_counts(self):
        return np.bincount(self.symbols - 1, minlength=self.omega)


def _values(returns):
    if isinstance(returns, LogReturnSeries):
        return returns.returns
    return np.asarray(returns, dtype=np.float64)


def quantile_thresholds(returns, spec: DiscretizationSpec | None = None) -> Thresholds:
    """Lower empirical quantiles: T_k is the ceil(k*n/omega)-th order statistic."""
    spec = spec or DiscretizationSpec()
    values = np.sort(_values(returns))
    n = len(values)
    if n < spec.omega:
        raise ValueError(f"need at least omega={spec.omega} values, got {n}")
    ranks = [(k * n + spec.omega - 1) // spec.omega for k in range(1, spec.omega)]
    return Thresholds(values[np.array(ranks) - 1])


def discretize(returns, thresholds: Thresholds, instrument_id: str | None = None) -> SymbolSeries:
    """Map v to the smallest k with v <= T_k, or to omega above the last cut."""
    values = _values(returns)
    if instrument_id is None:
        instrument_id = getattr(returns, "instrument_id", "")
    symbols = np.searchsorted(thresholds.cut_points, values, side="left") + 1
    return SymbolSeries(instrument_id, symbols.astype(np.int32), thresholds.omega)


def discretize_global(returns, spec: DiscretizationSpec | None = None) -> SymbolSeries:
    """Thresholds from the whole series, then binning of the same series."""
    return discretize(returns, quantile_thresholds(returns, spec))

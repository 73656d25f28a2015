"""Maximum-entropy-production prediction of the next symbol."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .discretizer import SymbolSeries
from .entropy_core import as_codes


@dataclass(frozen=True)
class Prediction:
    predicted_symbol: int
    candidate_h: tuple[float, ...]
    tie: bool
    tied_set: frozenset[int]
    lambda_sums: tuple[int, ...]

    def to_dict(self):
        return {
            "predicted_symbol": self.predicted_symbol,
            "candidate_h": list(self.candidate_h),
            "tie": self.tie,
            "tied_set": sorted(self.tied_set),
            "lambda_sums": list(self.lambda_sums),
        }


def _window_codes(window, omega):
    if isinstance(window, SymbolSeries):
        return np.ascontiguousarray(window.codes, dtype=np.int32), int(window.omega)
    if omega is not None:
        return np.ascontiguousarray(SymbolSeries("", window, omega).codes), int(omega)
    return as_codes(window)


def _lambda_sums(window, omega):
    codes, alphabet = _window_codes(window, omega)
    if len(codes) < 2:
        raise ValueError(f"window needs at least 2 symbols, got {len(codes)}")
    return kernels.candidate_sums(codes, alphabet), len(codes) + 1


def candidate_entropies(window, omega: int | None = None) -> np.ndarray:
    """H-hat of ``window + [s]`` for s = 1..omega (element s-1).

    ``window`` is a :class:`SymbolSeries`, integer symbols in ``1..omega``,
    or, with ``omega`` omitted, any labels (ranked in sorted order).
    """
    sums, m = _lambda_sums(window, omega)
    return m * math.log2(m) / sums.astype(np.float64)


def mepp_predict(window, omega: int | None = None) -> Prediction:
    """Symbol maximising the entropy rate of the extended window.

    Ties go to the smallest symbol and are flagged.
    """
    sums, m = _lambda_sums(window, omega)
    h = m * math.log2(m) / sums.astype(np.float64)
    # all candidates have equal length: max H-hat <=> min integer lambda sum
    best = int(sums.min())
    tied = frozenset(int(s) + 1 for s in np.flatnonzero(sums == best))
    return Prediction(
        predicted_symbol=min(tied),
        candidate_h=tuple(float(x) for x in h),
        tie=len(tied) > 1,
        tied_set=tied,
        lambda_sums=tuple(int(x) for x in sums),
    )

"""Shannon entropy, Lempel-Ziv (Kontoyiannis) entropy rate, LZ phrase counts."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .discretizer import SymbolSeries


@dataclass(frozen=True)
class EntropyEstimate:
    """Entropy-rate estimate in bits per symbol.

    ``h_hat = n * log2(n) / lambda_sum`` where ``lambda_sum`` is the sum of
    match lengths over all positions.
    """

    h_hat: float
    n: int
    lambda_sum: int


def as_codes(symbols):
    """Return ``(codes, alphabet)`` with int32 codes in ``0..alphabet-1``.

    A :class:`SymbolSeries` keeps its declared alphabet; any other sequence
    of hashable labels is mapped to dense codes in sorted label order.
    """
    if isinstance(symbols, SymbolSeries):
        return np.ascontiguousarray(symbols.codes, dtype=np.int32), int(symbols.omega)
    seq = list(symbols) if isinstance(symbols, str) else symbols
    labels, codes = np.unique(np.asarray(seq), return_inverse=True)
    return np.ascontiguousarray(codes.ravel(), dtype=np.int32), max(len(labels), 1)


def shannon_entropy(counts) -> float:
    """Plug-in entropy in bits of a histogram; empty bins contribute 0."""
    c = np.asarray(counts, dtype=np.float64)
    if c.ndim != 1 or np.any(c < 0):
        raise ValueError("counts must be a 1-d sequence of non-negative numbers")
    total = c.sum()
    if total <= 0:
        raise ValueError("counts are all zero")
    p = c[c > 0] / total
    return float(-(p * np.log2(p)).sum()) + 0.0


def match_lengths(symbols) -> np.ndarray:
    """Lambda_i for every position: one plus the longest prefix of the
    suffix at ``i`` that occurs wholly inside ``symbols[:i]``.

    Runs in amortised ``O(n * alphabet)`` time.
    """
    codes, alphabet = as_codes(symbols)
    if len(codes) < 1:
        raise ValueError("match lengths of an empty series are undefined")
    return kernels.match_lengths(codes, alphabet)


def match_lengths_naive(symbols) -> list[int]:
    """Quadratic-or-worse reference for :func:`match_lengths`. Tests only."""
    s = list(symbols.symbols) if isinstance(symbols, SymbolSeries) else list(symbols)
    if not s:
        raise ValueError("match lengths of an empty series are undefined")
    n = len(s)
    out = []
    for i in range(n):
        longest = 0
        for length in range(1, n - i + 1):
            pattern = s[i : i + length]
            if any(s[j : j + length] == pattern for j in range(i - length + 1)):
                longest = length
            else:
                break
        out.append(longest + 1)
    return out


def lz_entropy_rate(symbols) -> EntropyEstimate:
    codes, alphabet = as_codes(symbols)
    n = len(codes)
    if n < 2:
        raise ValueError(f"entropy rate needs at least 2 symbols, got {n}")
    lam = int(kernels.match_lengths(codes, alphabet).sum())
    return EntropyEstimate(n * math.log2(n) / lam, n, lam)


def lz76_parse(symbols) -> list[tuple]:
    """Split into phrases, each the shortest prefix of the rest not seen as a
    phrase before. A trailing phrase is kept even if it repeats one.
    """
    s = list(symbols.symbols) if isinstance(symbols, SymbolSeries) else list(symbols)
    phrases = []
    # trie of phrases; every new phrase extends a known one by one symbol
    root: dict = {}
    node = root
    start = 0
    for i, x in enumerate(s):
        if x in node:
            node = node[x]
            continue
        node[x] = {}
        phrases.append(tuple(s[start : i + 1]))
        start = i + 1
        node = root
    if start < len(s):
        phrases.append(tuple(s[start:]))
    return phrases


def lz76_pattern_count(symbols) -> int:
    return len(lz76_parse(symbols))

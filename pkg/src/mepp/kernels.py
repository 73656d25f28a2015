"""Hot loops: match lengths, MEPP candidate scoring, sliding-window backtest.

All kernels work on dense integer codes ``0 .. alphabet-1`` (``int32``).
Callers in :mod:`mepp.entropy_core`, :mod:`mepp.mepp_predictor` and
:mod:`mepp.backtest` do the conversion from user-facing symbols.

Match lengths are computed with a suffix automaton grown online over the
prefix ``codes[:i]`` while a matching pointer slides along the series. The
automaton recognises exactly the substrings of the prefix, so a match never
reaches into position ``i`` or beyond. Since ``L[i+1] >= L[i] - 1`` the
pointer only needs to shed its first symbol between steps, giving amortised
``O(n * alphabet)`` work.
"""

import numpy as np

from ._jit import njit


def workspace(m, alphabet):
    """Allocate automaton arrays for series up to length ``m``."""
    size = 2 * m + 2
    nxt = np.empty((size, alphabet), dtype=np.int32)
    link = np.empty(size, dtype=np.int32)
    length = np.empty(size, dtype=np.int32)
    return nxt, link, length


@njit
def fill_match_lengths(codes, m, alphabet, nxt, link, length, out):
    """Write Lambda_i = 1 + longest match into ``out[:m]``; return the sum.

    Only ``codes[:m]`` is read, so one workspace serves many windows.
    """
    for a in range(alphabet):
        nxt[0, a] = -1
    link[0] = -1
    length[0] = 0
    size = 1
    last = 0
    state = 0
    ell = 0
    total = 0
    for i in range(m):
        if i > 0:
            # grow the automaton by codes[i-1]
            c = codes[i - 1]
            cur = size
            size += 1
            length[cur] = length[last] + 1
            for a in range(alphabet):
                nxt[cur, a] = -1
            p = last
            while p != -1 and nxt[p, c] == -1:
                nxt[p, c] = cur
                p = link[p]
            if p == -1:
                link[cur] = 0
            else:
                q = nxt[p, c]
                if length[p] + 1 == length[q]:
                    link[cur] = q
                else:
                    clone = size
                    size += 1
                    length[clone] = length[p] + 1
                    for a in range(alphabet):
                        nxt[clone, a] = nxt[q, a]
                    link[clone] = link[q]
                    while p != -1 and nxt[p, c] == q:
                        nxt[p, c] = clone
                        p = link[p]
                    link[q] = clone
                    link[cur] = clone
            last = cur

            # drop the first symbol of the previous match; also re-homes the
            # pointer if its state was just split by a clone
            if ell > 0:
                ell -= 1
            while state != 0 and ell <= length[link[state]]:
                state = link[state]

        while i + ell < m:
            t = nxt[state, codes[i + ell]]
            if t == -1:
                break
            state = t
            ell += 1
        out[i] = ell + 1
        total += ell + 1
    return total


@njit
def match_lengths(codes, alphabet):
    m = codes.shape[0]
    size = 2 * m + 2
    nxt = np.empty((size, alphabet), dtype=np.int32)
    link = np.empty(size, dtype=np.int32)
    length = np.empty(size, dtype=np.int32)
    out = np.empty(m, dtype=np.int64)
    fill_match_lengths(codes, m, alphabet, nxt, link, length, out)
    return out


@njit
def candidate_sums(window, alphabet):
    """Sum of match lengths for ``window + [s]`` for every code ``s``."""
    w = window.shape[0]
    buf = np.empty(w + 1, dtype=np.int32)
    buf[:w] = window
    size = 2 * (w + 1) + 2
    nxt = np.empty((size, alphabet), dtype=np.int32)
    link = np.empty(size, dtype=np.int32)
    length = np.empty(size, dtype=np.int32)
    out = np.empty(w + 1, dtype=np.int64)
    sums = np.empty(alphabet, dtype=np.int64)
    for s in range(alphabet):
        buf[w] = s
        sums[s] = fill_match_lengths(buf, w + 1, alphabet, nxt, link, length, out)
    return sums


@njit
def backtest_window(codes, alphabet, mu):
    """Slide a window of ``mu + 1`` codes and score MEPP predictions.

    The prediction is the extension with the smallest match-length sum:
    every candidate has the same length, so minimising the sum maximises
    the entropy-rate estimate, and ties are detected on exact integers.

    Returns ``(hits, fractional_hits, ties, scored)``. ``fractional_hits``
    credits ``1 / |tied set|`` whenever the realised code is in the tied set.
    """
    n = codes.shape[0]
    w = mu + 1
    buf = np.empty(w + 1, dtype=np.int32)
    size = 2 * (w + 1) + 2
    nxt = np.empty((size, alphabet), dtype=np.int32)
    link = np.empty(size, dtype=np.int32)
    length = np.empty(size, dtype=np.int32)
    out = np.empty(w + 1, dtype=np.int64)
    sums = np.empty(alphabet, dtype=np.int64)
    hits = 0
    ties = 0
    frac = 0.0
    scored = 0
    for t in range(w - 1, n - 1):
        for k in range(w):
            buf[k] = codes[t - mu + k]
        best = -1
        for s in range(alphabet):
            buf[w] = s
            sums[s] = fill_match_lengths(buf, w + 1, alphabet, nxt, link, length, out)
            if best == -1 or sums[s] < sums[best]:
                best = s
        n_tied = 0
        for s in range(alphabet):
            if sums[s] == sums[best]:
                n_tied += 1
        actual = codes[t + 1]
        if n_tied > 1:
            ties += 1
        if best == actual:
            hits += 1
        if sums[actual] == sums[best]:
            frac += 1.0 / n_tied
        scored += 1
    return hits, frac, ties, scored


@njit
def generate_mepp(init, n, alphabet, mu):
    """Extend ``init`` to length ``n`` by repeated MEPP prediction.

    Each new code is predicted from the last ``mu + 1`` codes, or from the
    whole history when ``mu < 0``; ties go to the smallest code.
    """
    codes = np.empty(n, dtype=np.int32)
    k0 = init.shape[0]
    codes[:k0] = init
    size = 2 * (n + 1) + 2
    if mu >= 0:
        size = 2 * (mu + 2) + 2
    nxt = np.empty((size, alphabet), dtype=np.int32)
    link = np.empty(size, dtype=np.int32)
    length = np.empty(size, dtype=np.int32)
    buf = np.empty(n + 1, dtype=np.int32)
    out = np.empty(n + 1, dtype=np.int64)
    for i in range(k0, n):
        start = 0
        if mu >= 0:
            start = i - mu - 1
            if start < 0:
                start = 0
        w = i - start
        for k in range(w):
            buf[k] = codes[start + k]
        best = -1
        best_sum = 0
        for s in range(alphabet):
            buf[w] = s
            total = fill_match_lengths(buf, w + 1, alphabet, nxt, link, length, out)
            if best == -1 or total < best_sum:
                best = s
                best_sum = total
        codes[i] = best
    return codes

import numpy as np
import pytest


def brute_match_lengths(seq):
    """Independent oracle: enumerate every earlier start j and every length."""
    s = list(seq)
    n = len(s)
    out = []
    for i in range(n):
        best = 0
        for j in range(i):
            k = 0
            # occurrence s[j:j+k] must end before position i
            while i + k < n and j + k < i and s[j + k] == s[i + k]:
                k += 1
            best = max(best, k)
        out.append(best + 1)
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def substring_match_lengths(codes):
    """Second oracle: grow the pattern while it is found in the prefix."""
    b = bytes(int(c) for c in codes)
    n = len(b)
    out = []
    for i in range(n):
        k = 0
        while i + k < n and b[i : i + k + 1] in b[:i]:
            k += 1
        out.append(k + 1)
    return out


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)

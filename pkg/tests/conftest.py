"""Shared brute-force reference implementations.

These deliberately re-derive quantities by direct summation or enumeration,
independent of the library's cached/transfer-matrix/sector code paths, so a
test that compares the two is a genuine cross-check rather than a tautology.
"""

import math

import numpy as np
import pytest

from sqakit.worldlines import PathIntegralSystem, WorldlineConfiguration


def brute_log_weight(sys: PathIntegralSystem, spins: np.ndarray) -> float:
    """Direct term-by-term evaluation of the stationary log weight."""
    n, L = spins.shape
    total = 0.0
    for k in range(L):
        total += -sys.beta * sys.s / sys.L * sys.cost.values[int(spins[:, k].sum())]
    jumps = 0
    for j in range(n):
        for k in range(L):
            jumps += int(spins[j, k] != spins[j, (k + 1) % L])
    return total + jumps * math.log(math.tanh(sys.beta * (1 - sys.s) / sys.L))


def enumerate_pi(sys: PathIntegralSystem) -> np.ndarray:
    """Normalized stationary distribution over integer-encoded configurations."""
    n, L = sys.n, sys.L
    logs = np.array(
        [
            brute_log_weight(sys, WorldlineConfiguration.from_integer(c, n, L).spins)
            for c in range(2 ** (n * L))
        ]
    )
    w = np.exp(logs - logs.max())
    return w / w.sum()


def brute_conditional(sys: PathIntegralSystem, x: WorldlineConfiguration, i: int) -> np.ndarray:
    """Exact conditional of worldline i by enumerating its 2^L values."""
    L = x.L
    out = np.empty(2**L)
    y = x.copy()
    for code in range(2**L):
        bits = np.array([(code >> (L - 1 - k)) & 1 for k in range(L)], dtype=np.int8)
        y.spins[i] = bits
        y.rebuild_caches()
        out[code] = math.exp(brute_log_weight(sys, y.spins))
    return out / out.sum()


def brute_first_slice_marginal(sys: PathIntegralSystem) -> np.ndarray:
    """Hamming-weight marginal of the first slice by full enumeration."""
    n, L = sys.n, sys.L
    numer = np.zeros(n + 1)
    for c in range(2 ** (n * L)):
        x = WorldlineConfiguration.from_integer(c, n, L)
        numer[int(x.slice_weights[0])] += math.exp(brute_log_weight(sys, x.spins))
    return numer / numer.sum()


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)

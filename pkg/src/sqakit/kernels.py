"""Reversible Markov kernels on worldline configurations.

Two kernels target the stationary weight of :mod:`sqakit.worldlines`:

* single-site Metropolis: with probability 1/2 hold, otherwise flip one of
  the n*L spins chosen uniformly and accept with min(1, pi'/pi);
* single-qubit heat-bath: with probability 1/2 hold, otherwise pick a qubit
  uniformly and redraw its entire worldline exactly from the conditional
  distribution given all other worldlines.

The heat-bath conditional is a periodic length-L binary chain with
slice-local weights exp(-(beta*s/L) f(h_k + b)) (h_k = slice weight with the
chosen qubit removed) and a tanh(omega) factor per broken bond.  It is
sampled exactly by a 2x2 transfer-matrix sweep: condition on the first
slice, then filter forward with suffix products so each remaining slice is
drawn from its exact conditional given the prefix and the cycle closure.

Both kernels include the 1/2 holding probability, which keeps their
spectra nonnegative; the spectral arguments in :mod:`sqakit.chains` rely on
that.

The single-step functions here are the readable reference implementation;
:mod:`sqakit._fast` holds the numba drivers used for long runs, which follow
the same random-draw sequence so that equal seeds give equal trajectories.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .worldlines import PathIntegralSystem, WorldlineConfiguration, log_weight, log_weight_delta_flip

__all__ = [
    "METROPOLIS",
    "HEAT_BATH",
    "KERNELS",
    "RngStream",
    "metropolis_step",
    "worldline_heat_bath_step",
    "kernel_step",
    "worldline_conditional_probs",
    "sample_worldline",
    "transition_matrix",
    "stationarity_check",
]

METROPOLIS = "metropolis"
HEAT_BATH = "worldline_heat_bath"
KERNELS = (METROPOLIS, HEAT_BATH)


def _check_kernel(kind: str):
    if kind not in KERNELS:
        raise ValueError(f"unknown kernel {kind!r}, expected one of {KERNELS}")


@dataclass(frozen=True)
class RngStream:
    """Deterministic, splittable random stream.

    A stream is identified by a 64-bit root seed plus a path of substream
    keys (ints or short strings).  ``generator()`` yields a counter-based
    Philox generator keyed by hashing (seed, path), so identical seeds and
    paths reproduce identical trajectories bit for bit, and sibling
    substreams (per replica, per schedule point) never overlap.
    """

    seed: int
    path: tuple = ()

    def split(self, *keys) -> "RngStream":
        norm = []
        for key in keys:
            if isinstance(key, str):
                digest = hashlib.sha256(key.encode()).digest()
                norm.append(int.from_bytes(digest[:8], "little"))
            else:
                norm.append(int(key))
        return RngStream(seed=self.seed, path=self.path + tuple(norm))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=self.path)
        key = ss.generate_state(2, np.uint64)
        return np.random.Generator(np.random.Philox(key=key))


def metropolis_step(
    sys: PathIntegralSystem, x: WorldlineConfiguration, gen: np.random.Generator
) -> WorldlineConfiguration:
    """One lazy single-site Metropolis step, mutating ``x`` in place."""
    if gen.random() < 0.5:
        return x
    j = int(gen.integers(0, x.n))
    k = int(gen.integers(0, x.L))
    dlog = log_weight_delta_flip(sys, x, (j, k))
    if dlog >= 0.0 or gen.random() < np.exp(dlog):
        x.flip(j, k)
    return x


def _transfer_suffixes(d: np.ndarray, t: float) -> np.ndarray:
    """Suffix products S_k = (B D_k)(B D_{k+1})...(B D_{L-1}) B, k = 1..L.

    ``d`` is the (2, L) table of slice-local weights (column k already
    normalized so max_b d[b, k] = 1), ``t`` = tanh(omega) is the broken-bond
    weight.  Each suffix is renormalized by its largest entry to avoid
    underflow; only ratios of entries are ever used.
    """
    L = d.shape[1]
    B = np.array([[1.0, t], [t, 1.0]])
    S = np.empty((L + 1, 2, 2))
    S[L] = B
    for k in range(L - 1, 0, -1):
        M = B * d[:, k]  # M[a, c] = B[a, c] * d[c, k]
        S[k] = M @ S[k + 1]
        m = S[k].max()
        if not np.isfinite(m) or m <= 0.0:
            raise FloatingPointError("transfer-matrix normalization degenerated")
        S[k] /= m
    return S


def _local_weights(sys: PathIntegralSystem, h_excl: np.ndarray) -> np.ndarray:
    """(2, L) slice weights exp(-(beta s/L) f(h_k + b)), max-normalized per slice."""
    table = sys.cost.table
    e = np.stack([table[h_excl], table[h_excl + 1]])  # (2, L)
    e = e - e.min(axis=0)
    return np.exp(-sys.cost_scale * e)


def sample_worldline(
    sys: PathIntegralSystem, h_excl: np.ndarray, gen: np.random.Generator
) -> np.ndarray:
    """Exact draw of one periodic worldline given the other qubits' slice weights.

    Consumes exactly L uniforms so trajectories stay aligned across
    implementations.
    """
    L = sys.L
    d = _local_weights(sys, h_excl)
    t = np.tanh(sys.omega)
    S = _transfer_suffixes(d, t)
    bits = np.empty(L, dtype=np.int8)
    w0 = d[0, 0] * S[1][0, 0]
    w1 = d[1, 0] * S[1][1, 1]
    b0 = 1 if gen.random() * (w0 + w1) < w1 else 0
    bits[0] = b0
    prev = b0
    B = np.array([[1.0, t], [t, 1.0]])
    for k in range(1, L):
        w0 = B[prev, 0] * d[0, k] * S[k + 1][0, b0]
        w1 = B[prev, 1] * d[1, k] * S[k + 1][1, b0]
        prev = 1 if gen.random() * (w0 + w1) < w1 else 0
        bits[k] = prev
    return bits


def worldline_conditional_probs(sys: PathIntegralSystem, h_excl: np.ndarray) -> np.ndarray:
    """Exact conditional distribution over all 2^L worldline values.

    Same transfer-matrix math as :func:`sample_worldline`, expanded over the
    full chain rule.  Intended for small L (exactness checks); the sampler
    never materializes this vector.
    """
    L = sys.L
    d = _local_weights(sys, h_excl)
    t = np.tanh(sys.omega)
    S = _transfer_suffixes(d, t)
    B = np.array([[1.0, t], [t, 1.0]])
    probs = np.empty(2**L)
    for code in range(2**L):
        bits = [(code >> (L - 1 - k)) & 1 for k in range(L)]
        b0 = bits[0]
        w = d[b0, 0] * S[1][b0, b0]
        z = d[0, 0] * S[1][0, 0] + d[1, 0] * S[1][1, 1]
        p = w / z
        for k in range(1, L):
            prev = bits[k - 1]
            w0 = B[prev, 0] * d[0, k] * S[k + 1][0, b0]
            w1 = B[prev, 1] * d[1, k] * S[k + 1][1, b0]
            p *= (w1 if bits[k] else w0) / (w0 + w1)
        probs[code] = p
    return probs


def worldline_heat_bath_step(
    sys: PathIntegralSystem, x: WorldlineConfiguration, gen: np.random.Generator
) -> WorldlineConfiguration:
    """One lazy heat-bath worldline update, mutating ``x`` in place."""
    if gen.random() < 0.5:
        return x
    i = int(gen.integers(0, x.n))
    h_excl = x.slice_weights - x.spins[i]
    bits = sample_worldline(sys, h_excl, gen)
    x.spins[i] = bits
    x.slice_weights = h_excl + bits
    x.jump_counts[i] = int((bits != np.roll(bits, -1)).sum())
    return x


def kernel_step(kind: str, sys, x, gen):
    _check_kernel(kind)
    if kind == METROPOLIS:
        return metropolis_step(sys, x, gen)
    return worldline_heat_bath_step(sys, x, gen)


def _enumerate_log_weights(sys: PathIntegralSystem) -> np.ndarray:
    n, L = sys.n, sys.L
    out = np.empty(2 ** (n * L))
    for code in range(2 ** (n * L)):
        out[code] = log_weight(sys, WorldlineConfiguration.from_integer(code, n, L))
    return out


def transition_matrix(sys: PathIntegralSystem, kind: str, max_states: int = 4096):
    """Explicit transition matrix of a kernel on an enumerable state space.

    Returns (P, pi, logw): P indexed by the integer encoding of
    configurations, pi the normalized stationary weights from the worldline
    module, logw the raw log weights.  Metropolis rows are filled from the
    1/(2nL) min(1, ratio) rule; heat-bath rows from the transfer-matrix
    conditionals, so detailed balance of P against pi cross-checks the
    sampler arithmetic against the direct weight evaluation.
    """
    _check_kernel(kind)
    n, L = sys.n, sys.L
    size = 2 ** (n * L)
    if size > max_states:
        raise ValueError(f"state space 2^(nL) = {size} exceeds cap {max_states}")
    logw = _enumerate_log_weights(sys)
    pi = np.exp(logw - logw.max())
    pi /= pi.sum()
    P = np.zeros((size, size))
    if kind == METROPOLIS:
        for code in range(size):
            x = WorldlineConfiguration.from_integer(code, n, L)
            for j in range(n):
                for k in range(L):
                    dlog = log_weight_delta_flip(sys, x, (j, k))
                    y = code ^ (1 << (n * L - 1 - (j * L + k)))
                    P[code, y] += min(1.0, np.exp(dlog)) / (2 * n * L)
            P[code, code] += 1.0 - P[code].sum()
    else:
        for code in range(size):
            x = WorldlineConfiguration.from_integer(code, n, L)
            P[code, code] += 0.5
            for i in range(n):
                h_excl = x.slice_weights - x.spins[i]
                cond = worldline_conditional_probs(sys, h_excl)
                for wcode in range(2**L):
                    shift = n * L - L * (i + 1)
                    y = (code & ~(((1 << L) - 1) << shift)) | (wcode << shift)
                    P[code, y] += cond[wcode] / (2 * n)
    return P, pi, logw


def stationarity_check(sys: PathIntegralSystem, kind: str, max_states: int = 4096) -> dict:
    """Detailed-balance and invariance report for an enumerable instance."""
    P, pi, _ = transition_matrix(sys, kind, max_states=max_states)
    flow = pi[:, None] * P
    db_violation = float(np.abs(flow - flow.T).max())
    row_sum_err = float(np.abs(P.sum(axis=1) - 1.0).max())
    stationarity_err = float(np.abs(pi @ P - pi).max())
    min_holding = float(np.diag(P).min())
    return {
        "kernel": kind,
        "n": sys.n,
        "L": sys.L,
        "states": P.shape[0],
        "row_sum_error": row_sum_err,
        "detailed_balance_violation": db_violation,
        "stationarity_error": stationarity_err,
        "min_holding_probability": min_holding,
        "ok": db_violation < 1e-10 and stationarity_err < 1e-10,
    }

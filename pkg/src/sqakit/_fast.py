"""Numba drivers for the sampling hot loops.

Each function reproduces the draw-for-draw random sequence of the reference
steps in :mod:`sqakit.kernels` (one laziness uniform, site indices, one
uniform per Metropolis acceptance or per heat-bath slice), so a trajectory
depends only on the seed, not on which implementation ran it.  State arrays
are mutated in place:

    spins    (n, L) int8      worldline bits
    slice_w  (L,)   int64     Hamming weight per time slice
    jump_c   (n,)   int64     broken bonds per worldline

Batch variants take a leading replica axis and advance replicas
sequentially off a single generator.
"""

import numpy as np
from numba import njit

__all__ = [
    "mtr_run",
    "hb_run",
    "mtr_sample",
    "hb_sample",
    "mtr_run_batch",
    "hb_run_batch",
    "product_init_batch",
]


@njit(cache=True, nogil=True)
def mtr_run(spins, slice_w, jump_c, ftab, cost_scale, log_tanh, nsteps, gen):
    n, L = spins.shape
    for _ in range(nsteps):
        if gen.random() < 0.5:
            continue
        j = gen.integers(0, n)
        k = gen.integers(0, L)
        old = spins[j, k]
        w = slice_w[k]
        dlog = -cost_scale * (ftab[w + 1 - 2 * old] - ftab[w])
        djumps = 0
        if L > 1:
            left = spins[j, (k - 1) % L]
            right = spins[j, (k + 1) % L]
            djumps = 2 - 2 * ((old != left) + (old != right))
            dlog += djumps * log_tanh
        if dlog >= 0.0 or gen.random() < np.exp(dlog):
            spins[j, k] = 1 - old
            slice_w[k] += 1 - 2 * old
            jump_c[j] += djumps


@njit(cache=True, nogil=True, inline="always")
def _hb_update(spins, slice_w, jump_c, ftab, cost_scale, t, i, d, S, newbits, gen):
    """Resample worldline i from its exact conditional; L uniforms consumed."""
    L = spins.shape[1]
    for k in range(L):
        h = slice_w[k] - spins[i, k]
        e0 = ftab[h]
        e1 = ftab[h + 1]
        m = e0 if e0 < e1 else e1
        d[0, k] = np.exp(-cost_scale * (e0 - m))
        d[1, k] = np.exp(-cost_scale * (e1 - m))
    S[L, 0, 0] = 1.0
    S[L, 0, 1] = t
    S[L, 1, 0] = t
    S[L, 1, 1] = 1.0
    for k in range(L - 1, 0, -1):
        m00 = d[0, k]
        m01 = t * d[1, k]
        m10 = t * d[0, k]
        m11 = d[1, k]
        a00 = m00 * S[k + 1, 0, 0] + m01 * S[k + 1, 1, 0]
        a01 = m00 * S[k + 1, 0, 1] + m01 * S[k + 1, 1, 1]
        a10 = m10 * S[k + 1, 0, 0] + m11 * S[k + 1, 1, 0]
        a11 = m10 * S[k + 1, 0, 1] + m11 * S[k + 1, 1, 1]
        mx = max(max(a00, a01), max(a10, a11))
        if not mx > 0.0 or np.isinf(mx):
            raise FloatingPointError("transfer-matrix normalization degenerated")
        S[k, 0, 0] = a00 / mx
        S[k, 0, 1] = a01 / mx
        S[k, 1, 0] = a10 / mx
        S[k, 1, 1] = a11 / mx
    w0 = d[0, 0] * S[1, 0, 0]
    w1 = d[1, 0] * S[1, 1, 1]
    b0 = 1 if gen.random() * (w0 + w1) < w1 else 0
    newbits[0] = b0
    prev = b0
    jumps = 0
    for k in range(1, L):
        bp0 = 1.0 if prev == 0 else t
        bp1 = t if prev == 0 else 1.0
        w0 = bp0 * d[0, k] * S[k + 1, 0, b0]
        w1 = bp1 * d[1, k] * S[k + 1, 1, b0]
        b = 1 if gen.random() * (w0 + w1) < w1 else 0
        newbits[k] = b
        if b != prev:
            jumps += 1
        prev = b
    if L > 1 and newbits[L - 1] != b0:
        jumps += 1
    for k in range(L):
        slice_w[k] += newbits[k] - spins[i, k]
        spins[i, k] = newbits[k]
    jump_c[i] = jumps


@njit(cache=True, nogil=True)
def hb_run(spins, slice_w, jump_c, ftab, cost_scale, t, nsteps, gen):
    n, L = spins.shape
    d = np.empty((2, L))
    S = np.empty((L + 1, 2, 2))
    newbits = np.empty(L, dtype=np.int8)
    for _ in range(nsteps):
        if gen.random() < 0.5:
            continue
        i = gen.integers(0, n)
        _hb_update(spins, slice_w, jump_c, ftab, cost_scale, t, i, d, S, newbits, gen)


@njit(cache=True, nogil=True)
def mtr_sample(
    spins, slice_w, jump_c, ftab, cost_scale, log_tanh, nsamples, stride, counts, st_trace, ind01, gen
):
    """Run Metropolis, recording every ``stride`` steps: first-slice weight
    histogram into ``counts`` and the spike time into ``st_trace``."""
    L = spins.shape[1]
    for samp in range(nsamples):
        mtr_run(spins, slice_w, jump_c, ftab, cost_scale, log_tanh, stride, gen)
        counts[slice_w[0]] += 1
        st = 0
        for k in range(L):
            st += ind01[slice_w[k]]
        st_trace[samp] = st


@njit(cache=True, nogil=True)
def hb_sample(
    spins, slice_w, jump_c, ftab, cost_scale, t, nsamples, stride, counts, st_trace, ind01, gen
):
    L = spins.shape[1]
    for samp in range(nsamples):
        hb_run(spins, slice_w, jump_c, ftab, cost_scale, t, stride, gen)
        counts[slice_w[0]] += 1
        st = 0
        for k in range(L):
            st += ind01[slice_w[k]]
        st_trace[samp] = st


@njit(cache=True, nogil=True)
def hb_scan_run(spins, slice_w, jump_c, ftab, cost_scale, t, nsweeps, gen):
    """Systematic-scan heat-bath: each sweep resamples worldlines 1..n in
    order, no holding steps.  The scan composition preserves the stationary
    distribution (each move is an exact conditional redraw) but is not the
    reversible chain the analysis modules study; it is the production
    variant for annealing runs, spending every transfer pass on an update.
    """
    n = spins.shape[0]
    L = spins.shape[1]
    d = np.empty((2, L))
    S = np.empty((L + 1, 2, 2))
    newbits = np.empty(L, dtype=np.int8)
    for _ in range(nsweeps):
        for i in range(n):
            _hb_update(spins, slice_w, jump_c, ftab, cost_scale, t, i, d, S, newbits, gen)


@njit(cache=True, nogil=True)
def mtr_run_batch(spins3, slice_w2, jump_c2, ftab, cost_scale, log_tanh, nsteps, gen):
    for r in range(spins3.shape[0]):
        mtr_run(spins3[r], slice_w2[r], jump_c2[r], ftab, cost_scale, log_tanh, nsteps, gen)


@njit(cache=True, nogil=True)
def hb_run_batch(spins3, slice_w2, jump_c2, ftab, cost_scale, t, nsteps, gen):
    n, L = spins3.shape[1], spins3.shape[2]
    d = np.empty((2, L))
    S = np.empty((L + 1, 2, 2))
    newbits = np.empty(L, dtype=np.int8)
    for r in range(spins3.shape[0]):
        for _ in range(nsteps):
            if gen.random() < 0.5:
                continue
            i = gen.integers(0, n)
            _hb_update(
                spins3[r], slice_w2[r], jump_c2[r], ftab, cost_scale, t, i, d, S, newbits, gen
            )


@njit(cache=True, nogil=True)
def product_init_batch(spins3, slice_w2, jump_c2, t, gen):
    """Exact sample of the s=0 stationary state (independent free worldlines).

    At s=0 the slice-local weights are uniform, so every worldline is an
    independent periodic Ising chain with bond weight t; the transfer
    suffixes are state-independent and shared across qubits and replicas.
    """
    R, n, L = spins3.shape
    S = np.empty((L + 1, 2, 2))
    S[L, 0, 0] = 1.0
    S[L, 0, 1] = t
    S[L, 1, 0] = t
    S[L, 1, 1] = 1.0
    for k in range(L - 1, 0, -1):
        a00 = S[k + 1, 0, 0] + t * S[k + 1, 1, 0]
        a01 = S[k + 1, 0, 1] + t * S[k + 1, 1, 1]
        a10 = t * S[k + 1, 0, 0] + S[k + 1, 1, 0]
        a11 = t * S[k + 1, 0, 1] + S[k + 1, 1, 1]
        mx = max(max(a00, a01), max(a10, a11))
        S[k, 0, 0] = a00 / mx
        S[k, 0, 1] = a01 / mx
        S[k, 1, 0] = a10 / mx
        S[k, 1, 1] = a11 / mx
    for r in range(R):
        for k in range(L):
            slice_w2[r, k] = 0
        for i in range(n):
            w0 = S[1, 0, 0]
            w1 = S[1, 1, 1]
            b0 = 1 if gen.random() * (w0 + w1) < w1 else 0
            spins3[r, i, 0] = b0
            prev = b0
            jumps = 0
            for k in range(1, L):
                bp0 = 1.0 if prev == 0 else t
                bp1 = t if prev == 0 else 1.0
                w0 = bp0 * S[k + 1, 0, b0]
                w1 = bp1 * S[k + 1, 1, b0]
                b = 1 if gen.random() * (w0 + w1) < w1 else 0
                spins3[r, i, k] = b
                if b != prev:
                    jumps += 1
                prev = b
            if L > 1 and spins3[r, i, L - 1] != b0:
                jumps += 1
            jump_c2[r, i] = jumps
            for k in range(L):
                slice_w2[r, k] += spins3[r, i, k]

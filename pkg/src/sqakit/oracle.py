"""Exact reference computations for the permutation-symmetric quantum system.

The annealing Hamiltonian interpolates between a uniform transverse field
and a diagonal Hamming-symmetric cost,

    H(s) = -(1-s) * sum_i X_i + s * diag(f(|z|)).

Everything here exploits permutation symmetry: H(s) is block diagonal in
total-spin sectors J = n/2 - r, r = 0..floor(n/2), the sector with spin J
appearing with multiplicity C(n,r) - C(n,r-1).  Within a sector the basis
states carry definite Hamming weight k = n/2 - m_z, so each block is a real
symmetric tridiagonal matrix of dimension 2J+1 and all computations cost
O(n^3) per sector instead of O(8^n).

The module supplies the sampler ground truths: exact spectra and gaps,
thermal Hamming-weight marginals, the Trotterized marginal (the exact
marginal of the path-integral stationary distribution on one time slice),
spike-window occupation moments, and imaginary-time correlators.  A dense
2^n brute-force Hamiltonian builder is kept as the independent test oracle.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh, eigh_tridiagonal
from scipy.special import comb, logsumexp
from scipy.stats import binom

from .costs import SpikeIndicator, SymmetricCost

__all__ = [
    "DEFAULT_SECTOR_CAP",
    "SectorSpectrum",
    "SymmetricSpectrum",
    "OracleMarginal",
    "sector_labels",
    "sector_multiplicity",
    "build_sector_hamiltonian",
    "spectrum",
    "dense_hamiltonian",
    "spikeless_gap",
    "spikeless_excitation_fraction",
    "spikeless_ground_marginal",
    "thermal_marginal",
    "trotter_marginal",
    "spike_expectation",
    "trotter_spike_second_moment",
    "imaginary_time_correlator",
    "log_partition_functions",
    "gap_curve",
]

DEFAULT_SECTOR_CAP = 256


def _check_cap(n: int, cap: int):
    if n > cap:
        raise ValueError(f"n = {n} exceeds the sector cap {cap}")


def sector_labels(n: int):
    """Yield (r, J, multiplicity, weights) for every total-spin sector."""
    for r in range(n // 2 + 1):
        yield r, (n - 2 * r) / 2.0, sector_multiplicity(n, r), np.arange(r, n - r + 1)


def sector_multiplicity(n: int, r: int) -> int:
    """Number of copies of the spin-(n/2 - r) representation in (C^2)^n."""
    return int(comb(n, r, exact=True) - (comb(n, r - 1, exact=True) if r >= 1 else 0))


def _ladder_couplings(n: int, r: int) -> np.ndarray:
    """|<k+1| sum_i X_i |k>| within the sector J = n/2 - r, k = r..n-r-1.

    Standard total-spin ladder values sqrt(J(J+1) - m(m-1)) with m = n/2 - k,
    evaluated in integer arithmetic; tests validate them against the dense
    Hamiltonian rather than trusting the algebra.
    """
    k = np.arange(r, n - r)
    jj = (n - 2 * r) * (n - 2 * r + 2)
    mm = (n - 2 * k) * (n - 2 * k - 2)
    return np.sqrt((jj - mm) / 4.0)


def build_sector_hamiltonian(cost: SymmetricCost, s: float, J: float) -> np.ndarray:
    """Dense (2J+1) x (2J+1) block of H(s) in the Hamming-weight basis."""
    n = cost.n
    r = round(n / 2.0 - J)
    if not (0 <= r <= n // 2) or abs((n - 2 * r) / 2.0 - J) > 1e-12:
        raise ValueError(f"J = {J} is not a valid sector spin for n = {n}")
    diag = s * cost.table[np.arange(r, n - r + 1)]
    off = -(1.0 - s) * _ladder_couplings(n, r)
    return np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)


def _sector_eigh(cost: SymmetricCost, s: float, r: int):
    n = cost.n
    diag = s * cost.table[np.arange(r, n - r + 1)]
    if diag.size == 1:
        return diag.copy(), np.ones((1, 1))
    off = -(1.0 - s) * _ladder_couplings(n, r)
    return eigh_tridiagonal(diag, off)


@dataclass(frozen=True)
class SectorSpectrum:
    J: float
    multiplicity: int
    weights: np.ndarray = field(repr=False)
    eigenvalues: np.ndarray = field(repr=False)
    eigenvectors: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class SymmetricSpectrum:
    s: float
    n: int
    sectors: list
    ground_energy: float
    gap: float

    def full_spectrum(self) -> np.ndarray:
        """All 2^n eigenvalues with sector multiplicities, ascending.

        Materializes 2^n values; intended for the brute-force cross-checks
        at small n.
        """
        if self.n > 24:
            raise ValueError("full_spectrum materializes 2^n values; n too large")
        parts = [np.repeat(sec.eigenvalues, sec.multiplicity) for sec in self.sectors]
        return np.sort(np.concatenate(parts))

    def to_json(self) -> str:
        """Sector eigenvalues with multiplicities (eigenvectors omitted)."""
        return json.dumps(
            {
                "n": self.n,
                "s": self.s,
                "ground_energy": self.ground_energy,
                "gap": self.gap,
                "sectors": [
                    {
                        "J": sec.J,
                        "multiplicity": sec.multiplicity,
                        "weights": sec.weights.tolist(),
                        "eigenvalues": sec.eigenvalues.tolist(),
                    }
                    for sec in self.sectors
                ],
            }
        )


def spectrum(cost: SymmetricCost, s: float, cap: int = DEFAULT_SECTOR_CAP) -> SymmetricSpectrum:
    """Sector-decomposed exact spectrum of H(s)."""
    n = cost.n
    _check_cap(n, cap)
    sectors = []
    for r, J, mult, weights in sector_labels(n):
        evals, evecs = _sector_eigh(cost, s, r)
        sectors.append(
            SectorSpectrum(
                J=J, multiplicity=mult, weights=weights, eigenvalues=evals, eigenvectors=evecs
            )
        )
    # two lowest levels counting multiplicity, without materializing repeats
    candidates = []
    for sec in sectors:
        candidates.append((float(sec.eigenvalues[0]), min(sec.multiplicity, 2)))
        if sec.eigenvalues.size > 1:
            candidates.append((float(sec.eigenvalues[1]), 1))
    candidates.sort()
    e0 = candidates[0][0]
    e1 = candidates[0][0] if candidates[0][1] >= 2 else candidates[1][0]
    return SymmetricSpectrum(s=s, n=n, sectors=sectors, ground_energy=e0, gap=float(e1 - e0))


def dense_hamiltonian(cost: SymmetricCost, s: float) -> np.ndarray:
    """Brute-force 2^n x 2^n Hamiltonian; test oracle only (n <= ~12)."""
    n = cost.n
    dim = 2**n
    ks = np.array([bin(z).count("1") for z in range(dim)])
    H = np.diag(s * cost.table[ks])
    for z in range(dim):
        for i in range(n):
            H[z, z ^ (1 << i)] -= 1.0 - s
    return H


def spikeless_gap(s: float) -> float:
    """Level spacing 2*sqrt((1-s)^2 + s^2) of the spikeless system.

    This is the exact spacing of the non-interacting Hamiltonian when the
    ramp cost is measured in Pauli-Z units (i.e. for (1-s)*H_0 + s*(2*diag(k)-n),
    which is the conventional normalization for this closed form).  For the
    ramp f(k) = k taken literally the spacing is 2*sqrt((1-s)^2 + s^2/4);
    both are Theta(1) uniformly in s, which is all the decay estimates use.
    """
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"s must lie in [0, 1], got {s}")
    return 2.0 * math.sqrt((1.0 - s) ** 2 + s**2)


def spikeless_excitation_fraction(s: float) -> float:
    """Probability p(s) that one qubit is excited in the spikeless ground state.

    Ground state of [[0, -(1-s)], [-(1-s), s]]; p(0) = 1/2, p(1) = 0.
    """
    if s >= 1.0:
        return 0.0
    e0 = (s - math.sqrt(s * s + 4.0 * (1.0 - s) ** 2)) / 2.0
    v1 = -e0 / (1.0 - s)  # component on |1> relative to |0>
    return v1 * v1 / (1.0 + v1 * v1)


@dataclass(frozen=True)
class OracleMarginal:
    """Exact Hamming-weight distribution of a reference state."""

    kind: str
    n: int
    probs: np.ndarray = field(repr=False)
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=np.float64)
        if p.shape != (self.n + 1,):
            raise ValueError("probs must have length n+1")
        if p.min() < -1e-12 or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("probs is not a probability vector")

    def tv_distance(self, other: np.ndarray) -> float:
        return 0.5 * float(np.abs(self.probs - np.asarray(other)).sum())

    def to_json(self) -> str:
        return json.dumps(
            {"kind": self.kind, "n": self.n, "params": self.params, "probs": self.probs.tolist()}
        )


def spikeless_ground_marginal(n: int, s: float) -> OracleMarginal:
    """Binomial(n, p(s)) ground-state weight distribution of the spikeless system."""
    p = spikeless_excitation_fraction(s)
    probs = binom.pmf(np.arange(n + 1), n, p)
    return OracleMarginal(kind="ground", n=n, probs=probs / probs.sum(), params={"s": s, "p": p})


def thermal_marginal(
    cost: SymmetricCost, s: float, beta: float, cap: int = DEFAULT_SECTOR_CAP
) -> OracleMarginal:
    """Hamming-weight marginal of exp(-beta H(s)) / Z."""
    n = cost.n
    _check_cap(n, cap)
    spec = spectrum(cost, s, cap=cap)
    e0 = spec.ground_energy
    numer = np.zeros(n + 1)
    for sec in spec.sectors:
        boltz = np.exp(-beta * (sec.eigenvalues - e0))
        numer[sec.weights] += sec.multiplicity * (sec.eigenvectors**2 @ boltz)
    return OracleMarginal(
        kind="thermal", n=n, probs=numer / numer.sum(), params={"s": s, "beta": beta}
    )


def _trotter_sector_data(cost: SymmetricCost, s: float, beta: float, L: int):
    """Per-sector eigendata of the symmetrized slice operator.

    The slice transfer operator M = e^{A/L} e^{B/L} (A = -beta*s*H_f,
    B = -beta*(1-s)*H_0) is similar to the symmetric positive definite
    N = e^{A/2L} e^{B/L} e^{A/2L} via the diagonal e^{A/2L}, which commutes
    with Hamming-weight projectors; traces against weight projectors are
    therefore computed from N.  Yields (weights, multiplicity, lam, W,
    log_scale) per sector with N = exp(log_scale) * W diag(lam) W^T after
    shifting off the sector's extreme exponents for overflow safety.
    """
    n = cost.n
    fshift = cost.table - cost.table.min()
    out = []
    for r, J, mult, weights in sector_labels(n):
        diag = np.zeros(weights.size)
        if weights.size == 1:
            eps, V = diag.copy(), np.ones((1, 1))
        else:
            off = -_ladder_couplings(n, r)
            eps, V = eigh_tridiagonal(diag, off)
        be = beta * (1.0 - s) / L * (eps - eps.min())
        expB = (V * np.exp(-be)) @ V.T
        half_a = np.exp(-0.5 * beta * s / L * fshift[weights])
        N = half_a[:, None] * expB * half_a[None, :]
        lam, W = eigh(N)
        lam = np.clip(lam, 1e-300, None)
        log_scale = -beta * (1.0 - s) / L * eps.min() - beta * s / L * cost.table.min()
        out.append((weights, mult, lam, W, log_scale))
    return out


def trotter_marginal(
    cost: SymmetricCost, s: float, beta: float, L: int, cap: int = DEFAULT_SECTOR_CAP
) -> OracleMarginal:
    """Exact Hamming-weight marginal of the Trotterized stationary distribution.

    probs[k] = Tr[P_k M^L] / Tr[M^L]; this is the distribution the path-
    integral sampler targets on each time slice, so it is the primary
    sampler ground truth (the continuum thermal marginal differs by the
    O(1/L) Trotter error).
    """
    n = cost.n
    _check_cap(n, cap)
    sectors = _trotter_sector_data(cost, s, beta, L)
    logs = [L * (np.log(lam) + ls) for (_, _, lam, _, ls) in sectors]
    shift = max(lg.max() for lg in logs)
    numer = np.zeros(n + 1)
    for (weights, mult, lam, W, ls), lg in zip(sectors, logs):
        numer[weights] += mult * (W**2 @ np.exp(lg - shift))
    return OracleMarginal(
        kind="trotter", n=n, probs=numer / numer.sum(), params={"s": s, "beta": beta, "L": L}
    )


def spike_expectation(
    cost: SymmetricCost,
    s: float,
    beta: float,
    L: int,
    ind: SpikeIndicator,
    cap: int = DEFAULT_SECTOR_CAP,
) -> float:
    """<S> under the Trotterized state: total marginal mass on the spike window.

    By imaginary-time translation invariance this equals <ST>/L exactly,
    with ST the number of slices inside the window.
    """
    marg = trotter_marginal(cost, s, beta, L, cap=cap)
    return float(marg.probs[ind.weights()].sum())


def trotter_spike_second_moment(
    cost: SymmetricCost,
    s: float,
    beta: float,
    L: int,
    ind: SpikeIndicator,
    cap: int = DEFAULT_SECTOR_CAP,
) -> float:
    """Exact <ST^2> under the Trotterized stationary distribution.

    <ST^2> = sum_{t1,t2} <1_S(x_{t1}) 1_S(x_{t2})> = L * sum_{d=0}^{L-1}
    Tr[S N^d S N^{L-d}] / Tr[N^L], evaluated per sector from the
    eigendecomposition of the symmetrized slice operator.
    """
    n = cost.n
    _check_cap(n, cap)
    ind01 = np.asarray(ind(np.arange(n + 1)), dtype=np.float64)
    sectors = _trotter_sector_data(cost, s, beta, L)
    shift = max((L * (np.log(lam).max() + ls)) for (_, _, lam, _, ls) in sectors)
    numer = 0.0
    denom = 0.0
    for weights, mult, lam, W, ls in sectors:
        loglam = np.log(lam)
        scaled = loglam - loglam.max()
        sector_log = L * (loglam.max() + ls) - shift
        d_pows = np.exp(np.outer(scaled, np.arange(L + 1)))  # (dim, L+1)
        T = d_pows[:, :L] @ d_pows[:, L:0:-1].T  # T_ij = sum_d lam_i^d lam_j^(L-d)
        G = (W * ind01[weights][:, None]).T @ W
        numer += mult * np.exp(sector_log) * float((G**2 * T).sum())
        denom += mult * np.exp(sector_log) * float(np.exp(L * scaled).sum())
    return L * numer / denom


def imaginary_time_correlator(
    cost: SymmetricCost,
    s: float,
    beta: float,
    taus,
    ind: SpikeIndicator,
    cap: int = DEFAULT_SECTOR_CAP,
) -> float:
    """Thermal m-point correlator of the spike projector at imaginary times.

    Tr[e^{-tau_1 H} S e^{-(tau_2-tau_1) H} S ... S e^{-(beta-tau_m) H}] / Z
    with S the projector onto spike-window Hamming weights; S is symmetric
    and block diagonal, so each sector is handled independently.  Times must
    be sorted, 0 <= tau_1 <= ... <= tau_m <= beta, and m <= 4 (higher moments
    are outside the validated envelope).
    """
    taus = list(map(float, taus))
    m = len(taus)
    if m < 1 or m > 4:
        raise ValueError(f"need 1 <= m <= 4 insertion times, got {m}")
    if any(t2 < t1 for t1, t2 in zip(taus, taus[1:])):
        raise ValueError("insertion times must be sorted ascending")
    if taus[0] < 0 or taus[-1] > beta:
        raise ValueError("insertion times must lie in [0, beta]")
    n = cost.n
    _check_cap(n, cap)
    spec = spectrum(cost, s, cap=cap)
    e0 = spec.ground_energy
    ind01 = np.asarray(ind(np.arange(n + 1)), dtype=np.float64)
    durs = np.diff(np.array([0.0] + taus + [beta]))  # m+1 propagation segments
    numer = 0.0
    denom = 0.0
    for sec in spec.sectors:
        ev = sec.eigenvalues - e0
        V = sec.eigenvectors
        S_eig = (V * ind01[sec.weights][:, None]).T @ V  # S in the eigenbasis
        prod = np.diag(np.exp(-durs[0] * ev))
        for dur in durs[1:]:
            prod = prod @ S_eig @ np.diag(np.exp(-dur * ev))
        numer += sec.multiplicity * float(np.trace(prod))
        denom += sec.multiplicity * float(np.exp(-beta * ev).sum())
    return numer / denom


def log_partition_functions(cost: SymmetricCost, s: float, beta: float, L: int) -> dict:
    """Log partition values in all three normalizations.

    ``log_Z_trace`` is log Tr[(e^{A/L} e^{B/L})^L]; ``log_Z_weight_form`` is
    the same trace with the cosh(omega)^(nL) prefactor removed, i.e. the
    normalizer of the worldline weights used by the sampler; ``log_Z_exact``
    is the continuum log Tr e^{-beta H}.
    """
    n = cost.n
    parts = []
    for weights, mult, lam, W, ls in _trotter_sector_data(cost, s, beta, L):
        parts.append(np.log(mult) + L * (np.log(lam) + ls))
    log_z_trace = float(logsumexp(np.concatenate(parts)))
    omega = beta * (1.0 - s) / L
    spec = spectrum(cost, s)
    full = spec.full_spectrum()
    return {
        "log_Z_trace": log_z_trace,
        "log_Z_weight_form": log_z_trace - n * L * math.log(math.cosh(omega)),
        "log_Z_exact": float(logsumexp(-beta * full)),
    }


def gap_curve(cost: SymmetricCost, s_values, cap: int = DEFAULT_SECTOR_CAP) -> np.ndarray:
    """Spectral gap of H(s) over a grid of s values."""
    return np.array([spectrum(cost, s, cap=cap).gap for s in s_values])

import math

import numpy as np
import pytest
from scipy.special import comb
from scipy.stats import binom

from conftest import brute_first_slice_marginal, brute_log_weight, enumerate_pi
from sqakit import oracle
from sqakit.costs import SpikeIndicator, make_custom_cost, make_spike_cost, make_spikeless_cost
from sqakit.worldlines import PathIntegralSystem, WorldlineConfiguration


def test_sector_bookkeeping():
    for n in range(1, 11):
        total = sum(mult * w.size for _, _, mult, w in oracle.sector_labels(n))
        assert total == 2**n
    # multiplicity formula C(n,r) - C(n,r-1)
    assert oracle.sector_multiplicity(6, 0) == 1
    assert oracle.sector_multiplicity(6, 1) == 5
    assert oracle.sector_multiplicity(6, 2) == comb(6, 2, exact=True) - 6


def test_sector_hamiltonian_2x2_example():
    H = oracle.build_sector_hamiltonian(make_spikeless_cost(1), 0.5, 0.5)
    assert np.allclose(H, [[0.0, -0.5], [-0.5, 0.5]])
    evals = np.linalg.eigvalsh(H)
    assert evals[0] == pytest.approx((0.5 - math.sqrt(1.25)) / 2, abs=1e-12)
    assert evals[1] == pytest.approx((0.5 + math.sqrt(1.25)) / 2, abs=1e-12)
    with pytest.raises(ValueError):
        oracle.build_sector_hamiltonian(make_spikeless_cost(4), 0.5, 0.7)


def test_transverse_field_spectrum_at_s0():
    # at s=0 the full spectrum is -n + 2k with degeneracy C(n, k)
    n = 7
    spec = oracle.spectrum(make_spikeless_cost(n), 0.0)
    full = spec.full_spectrum()
    expected = np.sort(np.concatenate([[2 * k - n] * comb(n, k, exact=True) for k in range(n + 1)]))
    assert np.abs(full - expected).max() < 1e-10


@pytest.mark.parametrize("n,s", [(3, 0.3), (5, 0.62), (8, 0.5)])
def test_spectrum_matches_dense_diagonalization(n, s):
    for cost in (make_spikeless_cost(n), make_spike_cost(max(n, 4), 0.6, 0.2)):
        spec = oracle.spectrum(cost, s)
        dense = np.linalg.eigvalsh(oracle.dense_hamiltonian(cost, s))
        assert np.abs(spec.full_spectrum() - dense).max() < 1e-10
        assert spec.gap == pytest.approx(dense[1] - dense[0], abs=1e-10)


def test_ground_state_in_top_sector():
    spec = oracle.spectrum(make_spike_cost(8, 0.5, 0.0), 0.45)
    top = spec.sectors[0]
    assert top.J == 4.0
    assert spec.ground_energy == pytest.approx(top.eigenvalues[0], abs=1e-12)
    assert spec.gap >= 0


def test_spikeless_gap_formula_values():
    assert oracle.spikeless_gap(0.0) == pytest.approx(2.0)
    assert oracle.spikeless_gap(0.5) == pytest.approx(math.sqrt(2.0), abs=1e-12)
    assert oracle.spikeless_gap(1.0) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        oracle.spikeless_gap(1.5)


@pytest.mark.parametrize("n", [2, 4, 7, 10])
def test_spikeless_gap_matches_sector_numerics(n):
    # the closed form is the level spacing with the ramp in Pauli-Z units:
    # f(k) = 2k - n makes H(s) a sum of identical one-qubit terms with
    # gap 2 sqrt((1-s)^2 + s^2)
    for s in np.arange(0.0, 1.0001, 0.1):
        cost = make_custom_cost(2.0 * np.arange(n + 1) - n)
        spec = oracle.spectrum(cost, float(s))
        assert spec.gap == pytest.approx(oracle.spikeless_gap(float(s)), abs=1e-10)


def test_literal_ramp_gap_value():
    # with f(k) = k taken literally the spacing is 2 sqrt((1-s)^2 + s^2/4)
    for s in (0.2, 0.5, 0.8):
        spec = oracle.spectrum(make_spikeless_cost(6), s)
        assert spec.gap == pytest.approx(2 * math.sqrt((1 - s) ** 2 + s**2 / 4), abs=1e-10)


def test_spikeless_ground_marginal():
    n = 9
    marg0 = oracle.spikeless_ground_marginal(n, 0.0)
    assert np.abs(marg0.probs - binom.pmf(np.arange(n + 1), n, 0.5)).max() < 1e-12
    # p(s) matches the 2x2 ground eigenvector amplitude
    s = 0.5
    H = oracle.build_sector_hamiltonian(make_spikeless_cost(1), s, 0.5)
    evals, evecs = np.linalg.eigh(H)
    p = evecs[1, 0] ** 2
    assert oracle.spikeless_excitation_fraction(s) == pytest.approx(p, abs=1e-12)
    # tensor-power structure: marginal equals n-fold convolution of one qubit
    marg = oracle.spikeless_ground_marginal(n, s)
    single = np.array([1 - p, p])
    conv = np.array([1.0])
    for _ in range(n):
        conv = np.convolve(conv, single)
    assert np.abs(marg.probs - conv).max() < 1e-12


def test_thermal_marginal_limits_and_brute_force():
    n = 6
    cost = make_spike_cost(n, 0.8, 0.0)
    # beta -> 0: maximally mixed counts C(n,k)/2^n
    marg = oracle.thermal_marginal(cost, 0.5, 1e-9)
    uniform = np.array([comb(n, k) for k in range(n + 1)]) / 2**n
    assert np.abs(marg.probs - uniform).max() < 1e-8
    # brute force at moderate beta
    beta, s = 2.7, 0.63
    H = oracle.dense_hamiltonian(cost, s)
    evals, evecs = np.linalg.eigh(H)
    ks = np.array([bin(z).count("1") for z in range(2**n)])
    boltz = np.exp(-beta * (evals - evals[0]))
    diag = (evecs**2 * boltz[None, :]).sum(axis=1)
    expected = np.array([diag[ks == k].sum() for k in range(n + 1)])
    expected /= expected.sum()
    got = oracle.thermal_marginal(cost, s, beta)
    assert np.abs(got.probs - expected).max() < 1e-10


def test_thermal_approaches_ground_state():
    n = 8
    cost = make_spikeless_cost(n)
    s = 0.4
    ground = oracle.spikeless_ground_marginal(n, s)
    prev = None
    for beta in (2.0, 4.0, 8.0):
        tv = 0.5 * np.abs(oracle.thermal_marginal(cost, s, beta).probs - ground.probs).sum()
        if prev is not None:
            assert tv < prev / 2
        prev = tv
    assert prev < 1e-3


def test_trotter_marginal_micro_enumeration():
    # n=1, L=2: four worldline configurations by hand
    cost = make_spikeless_cost(1)
    beta, s, L = 1.7, 0.45, 2
    sys = PathIntegralSystem(cost=cost, L=L, beta=beta, s=s)
    expected = brute_first_slice_marginal(sys)
    got = oracle.trotter_marginal(cost, s, beta, L)
    assert np.abs(got.probs - expected).max() < 1e-12


def test_trotter_marginal_enumeration_n2_L3():
    cost = make_custom_cost([0.0, 1.4, 0.6])
    beta, s, L = 2.1, 0.55, 3
    sys = PathIntegralSystem(cost=cost, L=L, beta=beta, s=s)
    expected = brute_first_slice_marginal(sys)
    got = oracle.trotter_marginal(cost, s, beta, L)
    assert np.abs(got.probs - expected).max() < 1e-12


def test_trotter_converges_to_thermal():
    cost = make_spike_cost(4, 0.7, 0.0)
    beta, s = 3.0, 0.6
    thermal = oracle.thermal_marginal(cost, s, beta)
    tvs = []
    for L in (4, 8, 16, 32, 64):
        tm = oracle.trotter_marginal(cost, s, beta, L)
        tvs.append(0.5 * np.abs(tm.probs - thermal.probs).sum())
    ratios = [a / b for a, b in zip(tvs, tvs[1:])]
    assert all(r > 1.6 for r in ratios)  # roughly halves when L doubles
    assert tvs[-1] < 1e-3


def test_trotter_s0_cost_independent():
    a = oracle.trotter_marginal(make_spikeless_cost(5), 0.0, 2.0, 8)
    b = oracle.trotter_marginal(make_custom_cost([3.0, 0.0, 9.0, 1.0, 2.0, 5.0]), 0.0, 2.0, 8)
    assert np.abs(a.probs - b.probs).max() < 1e-14


def test_spike_expectation_uniform_limit():
    # s=0, beta -> 0: mass on k=4 is C(16,4)/2^16
    cost = make_spike_cost(16, 1 / 3, 0.0)
    ind = SpikeIndicator(16, 0.0)
    val = oracle.spike_expectation(cost, 0.0, 1e-9, 4, ind)
    assert val == pytest.approx(comb(16, 4) / 2**16, abs=1e-8)
    assert val == pytest.approx(0.02777, abs=1e-4)


def test_spike_expectation_equals_mean_spike_time_exactly():
    # <S> = <ST>/L via full enumeration of the worldline distribution
    cost = make_custom_cost([0.0, 1.6, 0.9])
    beta, s, L = 2.0, 0.5, 3
    sys = PathIntegralSystem(cost=cost, L=L, beta=beta, s=s)
    pi = enumerate_pi(sys)
    ind = SpikeIndicator(2, 0.0)  # window (0,1) is empty; use custom window below
    ind01 = np.array([0, 1, 0])  # treat weight-1 slices as "on the spike"

    class FakeInd:
        def weights(self):
            return np.array([1])

        def __call__(self, k):
            return ind01[np.asarray(k)]

    st = np.array(
        [
            ind01[WorldlineConfiguration.from_integer(c, 2, L).slice_weights].sum()
            for c in range(2 ** (2 * L))
        ]
    )
    mean_st = float((pi * st).sum())
    val = oracle.spike_expectation(cost, s, beta, L, FakeInd())
    assert val == pytest.approx(mean_st / L, abs=1e-12)
    # exact second moment against the same enumeration
    m2 = float((pi * st.astype(float) ** 2).sum())
    got = oracle.trotter_spike_second_moment(cost, s, beta, L, FakeInd())
    assert got == pytest.approx(m2, rel=1e-10)


def test_correlator_single_insertion_matches_thermal_mass():
    cost = make_spike_cost(6, 0.6, 0.0)
    beta, s = 2.5, 0.55
    ind = SpikeIndicator(6, 0.0)
    val = oracle.imaginary_time_correlator(cost, s, beta, [0.7], ind)
    thermal = oracle.thermal_marginal(cost, s, beta)
    mass = thermal.probs[ind.weights()].sum()
    assert val == pytest.approx(mass, rel=1e-10)


def test_correlator_projector_idempotence():
    cost = make_spike_cost(6, 0.6, 0.0)
    beta, s = 2.5, 0.55
    ind = SpikeIndicator(6, 0.0)
    one = oracle.imaginary_time_correlator(cost, s, beta, [0.9], ind)
    same = oracle.imaginary_time_correlator(cost, s, beta, [0.9, 0.9, 0.9], ind)
    assert same == pytest.approx(one, rel=1e-10)


def test_correlator_matches_dense_two_point():
    cost = make_spike_cost(4, 0.7, 0.0)
    beta, s = 2.0, 0.5
    ind = SpikeIndicator(4, 0.0)
    taus = [0.4, 1.3]
    H = oracle.dense_hamiltonian(cost, s)
    evals, evecs = np.linalg.eigh(H)
    ks = np.array([bin(z).count("1") for z in range(16)])
    S = np.diag(np.asarray(ind(ks), float))
    from scipy.linalg import expm

    E = lambda t: evecs @ np.diag(np.exp(-t * (evals - evals[0]))) @ evecs.T
    num = np.trace(E(taus[0]) @ S @ E(taus[1] - taus[0]) @ S @ E(beta - taus[1]))
    den = np.trace(E(beta))
    got = oracle.imaginary_time_correlator(cost, s, beta, taus, ind)
    assert got == pytest.approx(num / den, abs=1e-10)


def test_correlator_validation():
    cost = make_spike_cost(4, 0.7, 0.0)
    ind = SpikeIndicator(4, 0.0)
    with pytest.raises(ValueError):
        oracle.imaginary_time_correlator(cost, 0.5, 2.0, [1.5, 0.5], ind)
    with pytest.raises(ValueError):
        oracle.imaginary_time_correlator(cost, 0.5, 2.0, [0.1] * 5, ind)
    with pytest.raises(ValueError):
        oracle.imaginary_time_correlator(cost, 0.5, 2.0, [3.0], ind)


def test_partition_function_normalizations():
    cost = make_custom_cost([0.0, 1.3, 0.7])
    beta, s, L = 2.1, 0.55, 3
    sys = PathIntegralSystem(cost=cost, L=L, beta=beta, s=s)
    lp = oracle.log_partition_functions(cost, s, beta, L)
    brute = math.log(
        sum(
            math.exp(brute_log_weight(sys, WorldlineConfiguration.from_integer(c, 2, 3).spins))
            for c in range(64)
        )
    )
    assert lp["log_Z_weight_form"] == pytest.approx(brute, abs=1e-10)
    # Trotter trace approaches the exact partition function as L grows
    lp_big = oracle.log_partition_functions(cost, s, beta, 512)
    assert lp_big["log_Z_trace"] == pytest.approx(lp_big["log_Z_exact"], abs=1e-3)


def test_marginals_are_distributions():
    cost = make_spike_cost(10, 0.5, 0.3)
    for marg in (
        oracle.thermal_marginal(cost, 0.5, 3.0),
        oracle.trotter_marginal(cost, 0.5, 3.0, 16),
        oracle.spikeless_ground_marginal(10, 0.5),
    ):
        assert marg.probs.min() >= -1e-15
        assert marg.probs.sum() == pytest.approx(1.0, abs=1e-12)


def test_spike_gap_stays_order_one():
    # alpha + zeta < 1/2: min gap over s should not collapse as n grows
    mins = []
    for n in (8, 16, 24, 32):
        cost = make_spike_cost(n, 1 / 3, 0.0)
        gaps = oracle.gap_curve(cost, np.linspace(0.0, 1.0, 41))
        mins.append(gaps.min())
    assert min(mins) > 0.3
    assert mins[-1] > 0.5 * mins[0]


def test_sector_cap_enforced():
    with pytest.raises(ValueError):
        oracle.thermal_marginal(make_spikeless_cost(20), 0.5, 1.0, cap=10)


def test_json_exports():
    import json

    cost = make_spike_cost(6, 0.5, 0.0)
    marg = oracle.trotter_marginal(cost, 0.4, 2.0, 8)
    doc = json.loads(marg.to_json())
    assert doc["kind"] == "trotter" and len(doc["probs"]) == 7
    spec = oracle.spectrum(cost, 0.4)
    sdoc = json.loads(spec.to_json())
    assert sdoc["gap"] == pytest.approx(spec.gap)
    total = sum(sec["multiplicity"] * len(sec["eigenvalues"]) for sec in sdoc["sectors"])
    assert total == 2**6

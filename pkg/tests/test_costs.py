import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sqakit.costs import (
    SpikeIndicator,
    SymmetricCost,
    eval_cost,
    make_custom_cost,
    make_spike_cost,
    make_spikeless_cost,
)


def test_spike_cost_table_n16():
    c = make_spike_cost(16, 1 / 3, 0.0)
    # window (3.5, 4.5) catches only k = 4
    assert c(4) == pytest.approx(4 + 16 ** (1 / 3), abs=1e-12)
    assert c(4) == pytest.approx(6.5198, abs=1e-4)
    assert c(0) == 0.0
    for k in range(17):
        if k != 4:
            assert c(k) == float(k)


def test_spike_window_brute_force_scan():
    n, alpha, zeta = 64, 0.3, 0.2
    c = make_spike_cost(n, alpha, zeta)
    lo = n / 4 - n**zeta / 2
    hi = n / 4 + n**zeta / 2
    for k in range(n + 1):
        expected = k + (n**alpha if lo < k < hi else 0.0)
        assert c(k) == pytest.approx(expected, abs=1e-12)
    # the window is nonempty and the local minimum sits just above it
    ks = SpikeIndicator(n, zeta).weights()
    assert ks.size >= 1
    k_loc = int(np.ceil(hi))
    assert c(k_loc) == float(k_loc) and c(k_loc - 1) > c(k_loc)


def test_spike_cost_global_and_local_minima():
    c = make_spike_cost(16, 1 / 3, 0.0)
    vals = c.table
    assert vals.argmin() == 0 and vals[0] == 0.0
    assert vals[5] < vals[4]  # local basin boundary at the window edge


def test_spike_deviation_bounds():
    for n, alpha, zeta in [(16, 1 / 3, 0.0), (32, 0.4, 0.3), (100, 0.2, 0.5)]:
        c = make_spike_cost(n, alpha, zeta)
        dev = c.table - np.arange(n + 1)
        assert dev.max() <= n**alpha + 1e-12
        assert (dev != 0).sum() <= n**zeta + 1


def test_rejects_bad_parameters():
    with pytest.raises(ValueError):
        make_spike_cost(3, 0.5, 0.0)
    with pytest.raises(ValueError):
        make_spike_cost(16, float("nan"), 0.0)
    with pytest.raises(ValueError):
        make_spike_cost(16, 0.5, float("inf"))
    with pytest.raises(ValueError):
        make_spike_cost(16, 0.5, -0.1)
    with pytest.raises(ValueError):
        SymmetricCost(n=2, values=(0.0, 1.0), kind="custom")  # wrong length
    with pytest.raises(ValueError):
        SymmetricCost(n=1, values=(0.0, float("nan")), kind="custom")


def test_eval_cost_lookups():
    spikeless = make_spikeless_cost(8)
    assert eval_cost(spikeless, "11100000") == 3.0
    spike = make_spike_cost(16, 1 / 3, 0.0)
    z = np.zeros(16, dtype=int)
    z[[1, 5, 9, 13]] = 1
    assert eval_cost(spike, z) == pytest.approx(6.5198, abs=1e-4)
    custom = make_custom_cost([0.0, 5.0, 1.0])
    assert eval_cost(custom, "11") == 1.0
    with pytest.raises(ValueError):
        eval_cost(custom, "111")


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**16 - 1), st.randoms(use_true_random=False))
def test_eval_cost_permutation_invariant(bits, rand):
    c = make_spike_cost(16, 1 / 3, 0.0)
    z = np.array([(bits >> i) & 1 for i in range(16)])
    perm = list(range(16))
    rand.shuffle(perm)
    assert eval_cost(c, z) == eval_cost(c, z[perm])


def test_indicator_matches_inequality():
    ind = SpikeIndicator(n=16, zeta=0.0)
    ks = np.arange(17)
    direct = ((ks > 16 / 4 - 0.5) & (ks < 16 / 4 + 0.5)).astype(int)
    assert np.array_equal(ind(ks), direct)
    assert set(np.unique(ind(ks))) <= {0, 1}
    assert list(ind.weights()) == [4]


def test_json_round_trip():
    for c in (
        make_spikeless_cost(5),
        make_spike_cost(16, 1 / 3, 0.0),
        make_custom_cost([0.0, 2.5, 1.0]),
    ):
        back = SymmetricCost.from_json(c.to_json())
        assert back == c
        doc = json.loads(c.to_json())
        assert set(doc) == {"n", "kind", "alpha", "zeta", "values"}

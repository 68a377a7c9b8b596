"""Path-integral samplers versus the exact Trotter marginal.

Both Markov kernels target the same stationary distribution over n x L
worldline configurations; the sector-decomposed oracle computes the exact
Hamming-weight marginal of that distribution on one time slice, so sampler
output can be graded without any burn-in guesswork.  The same machinery
verifies the identity <spike time>/L = spike-window mass.
"""

import numpy as np

from sqakit.costs import SpikeIndicator, make_spike_cost
from sqakit.diagnostics import sample_marginal, tv_to_oracle
from sqakit.kernels import HEAT_BATH, METROPOLIS, RngStream
from sqakit.oracle import spike_expectation, trotter_marginal
from sqakit.worldlines import PathIntegralSystem

n, beta, L = 8, 3.0, 32
cost = make_spike_cost(n, 1 / 3, 0.0)
ind = SpikeIndicator(n, 0.0)

print(f"n={n}, beta={beta}, L={L}, spike(1/3, 0)")
print()
print("TV of 100k empirical first-slice samples to the exact marginal:")
for s in (0.2, 0.5, 0.8):
    sys = PathIntegralSystem(cost=cost, L=L, beta=beta, s=s)
    om = trotter_marginal(cost, s, beta, L)
    hb = sample_marginal(sys, HEAT_BATH, RngStream(1), 100_000, 400, 2, replicas=50)
    mt = sample_marginal(sys, METROPOLIS, RngStream(1), 100_000, 20_000, 20, replicas=50)
    print(
        f"  s={s}: heat-bath {tv_to_oracle(hb.estimate, om):.4f}, "
        f"metropolis {tv_to_oracle(mt.estimate, om):.4f}"
    )
print()

print("spike-time identity <ST>/L == spike-window mass (exact vs sampled):")
for s in (0.3, 0.55):
    sys = PathIntegralSystem(cost=cost, L=L, beta=beta, s=s)
    res = sample_marginal(sys, HEAT_BATH, RngStream(2), 40_000, 400, 2, replicas=20)
    st = res.stats()
    exact = spike_expectation(cost, s, beta, L, ind)
    print(
        f"  s={s}: sampled {st.mean / L:.4f} +- {st.se_mean / L:.4f}, exact {exact:.4f}"
    )
print()

s = 0.5
om = trotter_marginal(cost, s, beta, L)
print(f"exact weight marginal at s={s}:")
print(" ", np.array2string(om.probs, precision=4, suppress_small=True))

"""Tour of the spike cost family and its exact spectral gaps.

The cost is the Hamming ramp f(k) = k with an additive n^alpha bump on the
window (n/4 - n^zeta/2, n/4 + n^zeta/2).  The interesting regime is
alpha + zeta < 1/2, where the annealing Hamiltonian's minimum gap stays
bounded away from zero as n grows; pushing alpha + zeta past 1/2 makes the
minimum visibly sink.
"""

import numpy as np

from sqakit.costs import make_spike_cost
from sqakit.oracle import gap_curve, spikeless_gap

# the landscape at n = 16: ramp, bump at k = 4, local minimum at k = 5
cost = make_spike_cost(16, alpha=1 / 3, zeta=0.0)
print("f(k) for n=16, alpha=1/3, zeta=0:")
print("  k:", list(range(17)))
print("  f:", [round(v, 3) for v in cost.values])
print()

s_grid = np.linspace(0.0, 1.0, 21)
print("minimum spectral gap over s, by n:")
print("  n   alpha+zeta=1/3   alpha+zeta=0.65")
for n in (8, 16, 24, 32, 48, 64):
    easy = gap_curve(make_spike_cost(n, 1 / 3, 0.0), s_grid).min()
    hard = gap_curve(make_spike_cost(n, 0.45, 0.2), s_grid).min()
    print(f"  {n:3d}      {easy:8.4f}        {hard:8.4f}")
print()
print("the first column stays O(1); the second keeps shrinking")
print()

# the closed-form level spacing of the spikeless system (cost in Z units)
print("spikeless level spacing 2*sqrt((1-s)^2 + s^2):")
for s in (0.0, 0.25, 0.5, 0.75, 1.0):
    print(f"  s={s:.2f}: {spikeless_gap(s):.5f}")

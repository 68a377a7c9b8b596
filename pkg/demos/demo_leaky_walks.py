"""Leaky walks: mixing before absorption on a chain with a trap.

Delete two states from a 50-state reversible chain (walkers stepping onto
them are absorbed).  A warm start still tracks the stationary distribution
for a long intermediate window, governed by

    || mu P_G^t - pi ||_1  <=  M t pi(bad) + pi_min^-1 exp(-t / rho)

whose two terms trade off: leakage grows linearly, the spectral term dies
exponentially.  The filled-in chain P_F certifies the rate: its Dirichlet
gap is at least 1/rho with rho the congestion of paths inside the good set.
"""

import numpy as np

from sqakit import chains

gen = np.random.default_rng(7)
bad = np.array([11, 37])
chain = chains.random_reversible_chain(50, gen, bad_states=bad, suppression=2e-3)
in_g = np.ones(50, bool)
in_g[bad] = False
mu = np.where(in_g, chain.pi, 0.0)
mu /= mu.sum()

rep = chains.leaky_walk_analysis(chain, in_g, mu, t_max=10_000)
print(f"pi(bad) = {rep.pi_bad:.2e}, warm-start constant M = {rep.M:.4f}")
print(f"congestion inside the good set rho = {rep.rho:.2f}")
print(f"filled-in chain gap {rep.gap_filled:.4f} >= 1/rho = {1 / rep.rho:.4f}")
print()
print("     t    ||mu P_G^t - pi||_1       bound")
for t in (0, 10, 30, 100, 300, 1000, 3000, 10_000):
    print(f"  {t:6d}      {rep.tv_trace[t]:.6f}      {rep.bound_trace[t]:10.4f}")
print()
print(f"max violation of the inequality over all t: {rep.max_violation:.2e}")
print(f"max violation of mu P_G^t <= mu P_F^t <= M pi: {rep.warm_start_violation:.2e}")

gap_g, rho, ok = chains.substochastic_gap(chain, in_g)
print(f"restricted-form eigenvalue {gap_g:.4f} >= 1/rho = {1 / rho:.4f}: {ok}")

"""Quantum-inspired annealing versus classical annealing on spike costs.

Both optimizers get the same number of elementary bit operations per
instance (one worldline sweep = n transfer passes of length L; one
single-bit SA step = 1).  The spike blocks single-bit SA ever harder as n
grows, while the path-integral sampler hops it by resampling whole
worldlines that straddle the barrier in imaginary time.
"""

from sqakit.diagnostics import separation_benchmark, separation_csv
from sqakit.kernels import RngStream

rows = separation_benchmark(
    [16, 24, 32, 40],
    alpha=1 / 3,
    zeta=0.0,
    rng=RngStream(20240817),
    replicas=200,
    sa_replicas=400,
)

print(separation_csv(rows))
print("success at matched budgets:")
print("   n   budget(ops)   SQA     SA    min gap   oracle <ST>")
for r in rows:
    print(
        f"  {r['n']:3d}   {r['budget_ops']:8d}   {r['sqa_success']:.3f}  "
        f"{r['sa_success']:.3f}   {r['oracle_min_gap']:.3f}    {r['oracle_spike_time']:.3f}"
    )
print()
print("the SA column decays with n; the sampler column does not")

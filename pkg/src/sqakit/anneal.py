"""End-to-end simulated quantum annealing along a discretized adiabatic path.

The driver samples the Trotterized thermal state at a grid of adiabatic
parameters s_0 = 0 < s_1 < ... < s_max = 1 - 1/n.  The grid spacing is tied
to the warm-start requirement: consecutive stationary distributions must
stay within a pointwise factor, which the step-size lemma converts into
delta_s = O(1 / (beta n log n)).  Replicas are initialized with an exact
sample of the s = 0 product distribution (free worldlines), carried from
grid point to grid point (warm start), and a replica aborts if any of its
worldlines accumulates an implausible number of broken bonds (the jump
count per worldline is Binomial-like with mean beta (1-s), so the threshold
ceil(10 beta log n) is crossed with negligible probability by an
equilibrated replica).  The output sample of a replica is its first time
slice at s_max; success means that slice is the all-zeros string.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import _fast
from .costs import SpikeIndicator, SymmetricCost
from .kernels import HEAT_BATH, METROPOLIS, RngStream
from .oracle import trotter_marginal
from .worldlines import PathIntegralSystem, WorldlineConfiguration

__all__ = [
    "AnnealSchedule",
    "StepsizeCheck",
    "default_beta",
    "build_schedule",
    "stepsize_bound",
    "run_sqa",
    "SqaRunReport",
]


def default_beta(n: int, epsilon: float = 1.0, cap: float = 10.0) -> float:
    """Inverse temperature n^(epsilon/2), capped to keep tanh(omega) sane."""
    return min(float(n) ** (epsilon / 2.0), cap)


@dataclass(frozen=True)
class AnnealSchedule:
    """Adiabatic grid plus per-point sweep budget and abort threshold."""

    s_values: np.ndarray
    steps_per_s: int
    beta: float
    abort_jump_threshold: int

    def __post_init__(self):
        s = np.asarray(self.s_values, float)
        if s.ndim != 1 or s.size < 2 or (np.diff(s) <= 0).any():
            raise ValueError("s_values must be an increasing grid")
        if s[-1] >= 1.0:
            raise ValueError("schedule must stop strictly below s = 1")

    @property
    def s_max(self) -> float:
        return float(self.s_values[-1])


def build_schedule(
    n: int,
    beta: float,
    c: float = 1.0,
    steps_per_s: int = 8,
    abort_jump_threshold: int | None = None,
) -> AnnealSchedule:
    """Uniform grid from 0 to 1 - 1/n with spacing <= c / (beta n log n)."""
    if n < 2 or beta <= 0 or c <= 0:
        raise ValueError("need n >= 2, beta > 0, c > 0")
    s_max = 1.0 - 1.0 / n
    target = c / (beta * n * math.log(n))
    intervals = max(1, math.ceil(s_max / target))
    if abort_jump_threshold is None:
        abort_jump_threshold = math.ceil(10.0 * beta * math.log(n))
    return AnnealSchedule(
        s_values=np.linspace(0.0, s_max, intervals + 1),
        steps_per_s=steps_per_s,
        beta=beta,
        abort_jump_threshold=abort_jump_threshold,
    )


@dataclass(frozen=True)
class StepsizeCheck:
    """Measured Gibbs-ratio shifts for two energy tables vs the lemma bounds."""

    delta: float
    log_z_ratio: float
    max_log_p_ratio: float

    @property
    def z_ok(self) -> bool:
        return abs(self.log_z_ratio) <= self.delta + 1e-12

    @property
    def p_ok(self) -> bool:
        return self.max_log_p_ratio <= 2.0 * self.delta + 1e-12

    @property
    def ok(self) -> bool:
        return self.z_ok and self.p_ok


def stepsize_bound(E1, E2) -> StepsizeCheck:
    """If max |E1 - E2| <= delta then |log Z1/Z2| <= delta and
    max |log p1/p2| <= 2 delta; returns the measured quantities."""
    E1 = np.asarray(E1, float)
    E2 = np.asarray(E2, float)
    if E1.shape != E2.shape:
        raise ValueError("energy tables must share a domain")
    delta = float(np.abs(E1 - E2).max())
    ref = E1.min()
    logz1 = math.log(np.exp(-(E1 - ref)).sum())
    logz2 = math.log(np.exp(-(E2 - ref)).sum())
    logp1 = -(E1 - ref) - logz1
    logp2 = -(E2 - ref) - logz2
    return StepsizeCheck(
        delta=delta,
        log_z_ratio=logz1 - logz2,
        max_log_p_ratio=float(np.abs(logp1 - logp2).max()),
    )


@dataclass
class SqaRunReport:
    params: dict
    per_s: list
    success_rate: float
    aborts: int
    all_aborted: bool
    final_weights: np.ndarray = field(repr=False)
    wall_ms: float = 0.0

    def to_dict(self) -> dict:
        return {
            "params": self.params,
            "per_s": self.per_s,
            "success_rate": self.success_rate,
            "aborts": self.aborts,
            "all_aborted": self.all_aborted,
            "final_weights": self.final_weights.tolist(),
            "wall_ms": self.wall_ms,
        }


def _sweep_steps(kernel: str, n: int, L: int) -> int:
    """Kernel steps per sweep: nL site proposals or n worldline passes."""
    return n * L if kernel == METROPOLIS else n


def run_sqa(
    cost: SymmetricCost,
    schedule: AnnealSchedule,
    kernel: str,
    rng: RngStream,
    replicas: int,
    L: int,
    track_tv: bool = True,
    ind: SpikeIndicator | None = None,
    record_wall: bool = True,
    scan: bool = False,
    snapshot_every: int | None = None,
    snapshot_sink=None,
) -> SqaRunReport:
    """Anneal ``replicas`` independent chains along the schedule.

    Each replica owns a dedicated substream of ``rng`` (indexed by replica
    number), so enlarging the population never perturbs existing
    trajectories.  Per grid point the report tracks the pooled mean spike
    time and, when ``track_tv`` is set, the total-variation distance of the
    pooled first-slice weight histogram from the exact Trotter marginal.

    ``scan=True`` (heat-bath only) replaces the analyzed lazy random-site
    kernel with systematic full scans: every sweep resamples each worldline
    exactly once, so the whole budget goes into transfer passes.  Sweep cost
    in elementary operations is n*L either way.

    ``snapshot_every`` streams replica 0's configuration to ``snapshot_sink``
    (one JSON line per snapshot, tagged with s and the cumulative sweep
    count) whenever that many sweeps have elapsed since the last snapshot.
    """
    if kernel not in (METROPOLIS, HEAT_BATH):
        raise ValueError(f"unknown kernel {kernel!r}")
    if scan and kernel != HEAT_BATH:
        raise ValueError("systematic scan is only defined for the heat-bath kernel")
    if replicas < 1:
        raise ValueError("need at least one replica")
    n = cost.n
    beta = schedule.beta
    if ind is None:
        ind = SpikeIndicator(n=n, zeta=cost.zeta if cost.zeta is not None else 0.0)
    ind01 = np.asarray(ind(np.arange(n + 1)), dtype=np.int64)
    ftab = cost.table
    t0 = time.perf_counter()

    gens = [rng.split("replica", r).generator() for r in range(replicas)]
    spins3 = np.zeros((replicas, n, L), dtype=np.int8)
    slice_w2 = np.zeros((replicas, L), dtype=np.int64)
    jump_c2 = np.zeros((replicas, n), dtype=np.int64)
    omega0 = beta / L  # bond coupling at s = 0
    for r in range(replicas):
        _fast.product_init_batch(
            spins3[r : r + 1], slice_w2[r : r + 1], jump_c2[r : r + 1], math.tanh(omega0), gens[r]
        )
    alive = np.ones(replicas, dtype=bool)

    steps = schedule.steps_per_s * _sweep_steps(kernel, n, L)
    per_s = []
    sweeps_done = 0
    last_snapshot = 0
    for s in schedule.s_values:
        sys_s = PathIntegralSystem(cost=cost, L=L, beta=beta, s=float(s))
        cs = sys_s.cost_scale
        if kernel == METROPOLIS:
            lt = sys_s.log_tanh_omega
            for r in np.flatnonzero(alive):
                _fast.mtr_run(spins3[r], slice_w2[r], jump_c2[r], ftab, cs, lt, steps, gens[r])
        elif scan:
            t = math.tanh(sys_s.omega)
            for r in np.flatnonzero(alive):
                _fast.hb_scan_run(
                    spins3[r], slice_w2[r], jump_c2[r], ftab, cs, t, schedule.steps_per_s, gens[r]
                )
        else:
            t = math.tanh(sys_s.omega)
            for r in np.flatnonzero(alive):
                _fast.hb_run(spins3[r], slice_w2[r], jump_c2[r], ftab, cs, t, steps, gens[r])
        alive &= jump_c2.max(axis=1) <= schedule.abort_jump_threshold
        sweeps_done += schedule.steps_per_s
        if snapshot_every and snapshot_sink and sweeps_done - last_snapshot >= snapshot_every:
            last_snapshot = sweeps_done
            snap = WorldlineConfiguration(spins3[0].copy())
            snapshot_sink(
                json.dumps({"s": float(s), "sweeps": sweeps_done, "config": json.loads(snap.to_json())})
            )
        entry = {"s": float(s)}
        if alive.any():
            st = ind01[slice_w2[alive]].sum(axis=1)
            entry["mean_spike_time"] = float(st.mean())
            if track_tv:
                counts = np.bincount(slice_w2[alive, 0], minlength=n + 1)
                oracle_probs = trotter_marginal(cost, float(s), beta, L).probs
                entry["tv_to_oracle"] = float(
                    0.5 * np.abs(counts / counts.sum() - oracle_probs).sum()
                )
        per_s.append(entry)

    aborts = int(replicas - alive.sum())
    final_weights = slice_w2[:, 0].copy()
    success_rate = float((final_weights[alive] == 0).mean()) if alive.any() else 0.0
    params = {
        "n": n,
        "L": L,
        "beta": beta,
        "kernel": kernel,
        "scan": scan,
        "replicas": replicas,
        "steps_per_s": schedule.steps_per_s,
        "grid_points": int(schedule.s_values.size),
        "s_max": schedule.s_max,
        "abort_jump_threshold": schedule.abort_jump_threshold,
        "seed": rng.seed,
        "cost_kind": cost.kind,
        "alpha": cost.alpha,
        "zeta": cost.zeta,
    }
    wall = (time.perf_counter() - t0) * 1000.0 if record_wall else 0.0
    return SqaRunReport(
        params=params,
        per_s=per_s,
        success_rate=success_rate,
        aborts=aborts,
        all_aborted=not alive.any(),
        final_weights=final_weights,
        wall_ms=wall,
    )

"""Statistical estimators and benchmarking harnesses for the samplers.

Mixing is diagnosed on the Hamming-weight marginal of the first time slice,
the one quantity for which the oracle module provides an exact reference at
any size; full-configuration variation distance is only checked exhaustively
on micro instances (see the chains module).  Standard errors come from
batch means.  The separation harness matches the classical baseline to the
quantum-inspired sampler by elementary bit operations: one sweep costs n*L
site touches (Metropolis) or n transfer passes of length L (heat bath),
both counted as n*L; one k-flip SA step costs k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _fast
from .anneal import run_sqa, _sweep_steps
from .costs import SpikeIndicator, make_spike_cost
from .kernels import HEAT_BATH, METROPOLIS, RngStream
from .oracle import OracleMarginal, gap_curve, spike_expectation
from .sa import default_sa_schedule, run_sa
from .worldlines import PathIntegralSystem

__all__ = [
    "MarginalEstimate",
    "SpikeTimeStats",
    "MeasurementResult",
    "tv_to_oracle",
    "spike_time_stats",
    "sample_marginal",
    "mixing_steps_estimate",
    "separation_benchmark",
    "separation_csv",
    "MEASUREMENT_HEADER",
    "SEPARATION_HEADER",
]

MEASUREMENT_HEADER = (
    "n,alpha,zeta,beta,L,s,kernel,sweeps,tv,st_mean,st_m2,success,seed"
)
SEPARATION_HEADER = (
    "n,alpha,zeta,beta,L,budget_ops,sqa_success,sa_success,oracle_min_gap,oracle_spike_time,seed"
)


@dataclass
class MarginalEstimate:
    counts: np.ndarray
    nsamples: int

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.sum() != self.nsamples:
            raise ValueError("counts must sum to the sample count")

    @property
    def probs(self) -> np.ndarray:
        return self.counts / self.nsamples

    @property
    def standard_errors(self) -> np.ndarray:
        p = self.probs
        return np.sqrt(p * (1.0 - p) / self.nsamples)


@dataclass
class SpikeTimeStats:
    mean: float
    second_moment: float
    se_mean: float
    se_second_moment: float
    tail_freq: dict
    nsamples: int


def tv_to_oracle(est: MarginalEstimate, oracle: OracleMarginal) -> float:
    """Total variation between the empirical and exact weight marginals."""
    if est.counts.size != oracle.probs.size:
        raise ValueError("marginal sizes differ")
    return 0.5 * float(np.abs(est.probs - oracle.probs).sum())


def spike_time_stats(st_trace, thresholds=(), n_batches: int = 16) -> SpikeTimeStats:
    """Moments and tail frequencies of a spike-time trace with batch-means errors."""
    st = np.asarray(st_trace, dtype=np.float64)
    if st.size == 0:
        raise ValueError("empty trace")
    usable = (st.size // n_batches) * n_batches
    if usable >= n_batches:
        batches = st[:usable].reshape(n_batches, -1)
        bm = batches.mean(axis=1)
        bm2 = (batches**2).mean(axis=1)
        se_mean = float(bm.std(ddof=1) / math.sqrt(n_batches))
        se_m2 = float(bm2.std(ddof=1) / math.sqrt(n_batches))
    else:
        se_mean = float(st.std(ddof=1) / math.sqrt(st.size)) if st.size > 1 else 0.0
        se_m2 = 0.0
    tails = {float(b): float((st >= b).mean()) for b in thresholds}
    return SpikeTimeStats(
        mean=float(st.mean()),
        second_moment=float((st**2).mean()),
        se_mean=se_mean,
        se_second_moment=se_m2,
        tail_freq=tails,
        nsamples=st.size,
    )


@dataclass
class MeasurementResult:
    estimate: MarginalEstimate
    st_trace: np.ndarray = field(repr=False)
    sweeps_run: int = 0
    params: dict = field(default_factory=dict)

    def stats(self, thresholds=()) -> SpikeTimeStats:
        return spike_time_stats(self.st_trace, thresholds=thresholds)

    def csv_row(self, oracle: OracleMarginal | None = None) -> str:
        p = self.params
        tv = tv_to_oracle(self.estimate, oracle) if oracle is not None else float("nan")
        st = self.stats()
        return ",".join(
            str(v)
            for v in (
                p.get("n"),
                p.get("alpha"),
                p.get("zeta"),
                p.get("beta"),
                p.get("L"),
                p.get("s"),
                p.get("kernel"),
                self.sweeps_run,
                f"{tv:.6f}",
                f"{st.mean:.6f}",
                f"{st.second_moment:.6f}",
                f"{self.estimate.probs[0]:.6f}",
                p.get("seed"),
            )
        )


def _init_batch(sys: PathIntegralSystem, replicas: int, start: str, gen) -> tuple:
    n, L = sys.n, sys.L
    spins3 = np.zeros((replicas, n, L), dtype=np.int8)
    slice_w2 = np.zeros((replicas, L), dtype=np.int64)
    jump_c2 = np.zeros((replicas, n), dtype=np.int64)
    if start == "product":
        omega0 = sys.beta / sys.L  # s = 0 free-worldline coupling
        _fast.product_init_batch(spins3, slice_w2, jump_c2, math.tanh(omega0), gen)
    elif start == "zeros":
        pass
    elif start == "spike":
        w = int(round(n / 4.0))
        spins3[:, :w, :] = 1
        slice_w2[:] = w
    else:
        raise ValueError(f"unknown start {start!r}")
    return spins3, slice_w2, jump_c2


def _run_batch(sys, kernel, spins3, slice_w2, jump_c2, sweeps, gen):
    steps = sweeps * _sweep_steps(kernel, sys.n, sys.L)
    if steps == 0:
        return
    if kernel == METROPOLIS:
        _fast.mtr_run_batch(
            spins3, slice_w2, jump_c2, sys.cost.table, sys.cost_scale, sys.log_tanh_omega, steps, gen
        )
    else:
        _fast.hb_run_batch(
            spins3, slice_w2, jump_c2, sys.cost.table, sys.cost_scale, math.tanh(sys.omega), steps, gen
        )


def sample_marginal(
    sys: PathIntegralSystem,
    kernel: str,
    rng: RngStream,
    nsamples: int,
    burn_sweeps: int | None = None,
    stride_sweeps: int = 1,
    replicas: int = 1,
    start: str = "product",
    ind: SpikeIndicator | None = None,
) -> MeasurementResult:
    """Collect first-slice weight samples and spike times from equilibrium runs.

    The sample budget is split across independent replicas (each with its own
    substream); every replica burns in, then records one sample every
    ``stride_sweeps`` sweeps.  An unspecified burn-in defaults to half the
    per-replica sweep budget (sampling sweeps = burn-in sweeps).
    """
    n, L = sys.n, sys.L
    if burn_sweeps is None:
        burn_sweeps = max(1, (nsamples // max(replicas, 1)) * stride_sweeps)
    if ind is None:
        ind = SpikeIndicator(n=n, zeta=sys.cost.zeta if sys.cost.zeta is not None else 0.0)
    ind01 = np.asarray(ind(np.arange(n + 1)), dtype=np.int64)
    counts = np.zeros(n + 1, dtype=np.int64)
    traces = []
    per_rep = [nsamples // replicas] * replicas
    for r in range(nsamples % replicas):
        per_rep[r] += 1
    stride_steps = stride_sweeps * _sweep_steps(kernel, n, L)
    burn_steps = burn_sweeps * _sweep_steps(kernel, n, L)
    for r, quota in enumerate(per_rep):
        if quota == 0:
            continue
        gen = rng.split("measure", r).generator()
        spins3, slice_w2, jump_c2 = _init_batch(sys, 1, start, gen)
        spins, slice_w, jump_c = spins3[0], slice_w2[0], jump_c2[0]
        st_trace = np.zeros(quota, dtype=np.int64)
        if kernel == METROPOLIS:
            _fast.mtr_run(spins, slice_w, jump_c, sys.cost.table, sys.cost_scale, sys.log_tanh_omega, burn_steps, gen)
            _fast.mtr_sample(spins, slice_w, jump_c, sys.cost.table, sys.cost_scale, sys.log_tanh_omega, quota, stride_steps, counts, st_trace, ind01, gen)
        else:
            t = math.tanh(sys.omega)
            _fast.hb_run(spins, slice_w, jump_c, sys.cost.table, sys.cost_scale, t, burn_steps, gen)
            _fast.hb_sample(spins, slice_w, jump_c, sys.cost.table, sys.cost_scale, t, quota, stride_steps, counts, st_trace, ind01, gen)
        traces.append(st_trace)
    est = MarginalEstimate(counts=counts, nsamples=nsamples)
    params = {
        "n": n, "L": L, "beta": sys.beta, "s": sys.s, "kernel": kernel,
        "alpha": sys.cost.alpha, "zeta": sys.cost.zeta, "seed": rng.seed,
        "burn_sweeps": burn_sweeps, "stride_sweeps": stride_sweeps, "replicas": replicas,
        "start": start,
    }
    return MeasurementResult(
        estimate=est,
        st_trace=np.concatenate(traces),
        sweeps_run=burn_sweeps + (max(per_rep) * stride_sweeps),
        params=params,
    )


def mixing_steps_estimate(
    sys: PathIntegralSystem,
    kernel: str,
    oracle: OracleMarginal,
    tolerance: float,
    rng: RngStream,
    replicas: int = 1000,
    max_sweeps: int = 20000,
    check_every: int = 10,
    starts=("warm", "adversarial"),
) -> dict:
    """First sweep count at which the pooled replica marginal is within
    ``tolerance`` TV of the oracle, per starting condition.

    "warm" initializes replicas with the exact s=0 product sample;
    "adversarial" parks every slice of every replica on the spike weight
    round(n/4).  A start that never crosses within ``max_sweeps`` reports
    ``sweeps = None`` (a lower bound, not a failure).  The tolerance must
    exceed the multinomial noise floor of the replica population.
    """
    out = {}
    start_map = {"warm": "product", "adversarial": "spike"}
    for label in starts:
        gen = rng.split("mixing", label).generator()
        spins3, slice_w2, jump_c2 = _init_batch(sys, replicas, start_map[label], gen)
        trace = []
        crossed = None
        sweeps = 0
        while sweeps <= max_sweeps:
            counts = np.bincount(slice_w2[:, 0], minlength=sys.n + 1)
            tv = 0.5 * float(np.abs(counts / replicas - oracle.probs).sum())
            trace.append((sweeps, tv))
            if tv < tolerance:
                crossed = sweeps
                break
            if sweeps == max_sweeps:
                break
            step = min(check_every, max_sweeps - sweeps)
            _run_batch(sys, kernel, spins3, slice_w2, jump_c2, step, gen)
            sweeps += step
        out[label] = {"sweeps": crossed, "trace": trace}
    return out


def geometric_s_grid(n: int, points: int, floor: float = 0.01) -> np.ndarray:
    """Adiabatic grid from 0 to 1 - 1/n with spacing shrinking geometrically
    toward the endpoint, where the freeze-out needs the resolution."""
    s_max = 1.0 - 1.0 / n
    g = s_max * (1.0 - np.geomspace(1.0, floor, points) + floor) / (1.0 + floor)
    return np.unique(np.clip(g, 0.0, s_max))


def separation_benchmark(
    n_list,
    alpha: float,
    zeta: float,
    rng: RngStream,
    L: int = 6,
    grid_points: int = 16,
    steps_per_s: int = 1,
    replicas: int = 200,
    sa_replicas: int = 400,
    beta: float = 10.0,
    grid_floor: float = 0.01,
    kernel: str = HEAT_BATH,
    scan: bool = True,
) -> list:
    """SQA vs single-bit SA on spike instances at matched operation budgets.

    Per n the sampler anneals a geometric adiabatic grid with
    ``steps_per_s`` scan sweeps per point, for a budget of grid_points *
    steps_per_s * n * L elementary operations (one sweep = n transfer
    passes of length L); SA receives exactly that many single-bit steps
    spread over its default cooling ladder.  Rows also carry the exact
    minimum gap of the spike Hamiltonian and the oracle mean spike time at
    the gap minimum.
    """
    rows = []
    for n in n_list:
        cost = make_spike_cost(n, alpha, zeta)
        from .anneal import AnnealSchedule  # local import to avoid cycle at module load

        grid = geometric_s_grid(n, grid_points, grid_floor)
        schedule = AnnealSchedule(
            s_values=grid,
            steps_per_s=steps_per_s,
            beta=beta,
            abort_jump_threshold=math.ceil(10.0 * beta * math.log(n)),
        )
        sqa_report = run_sqa(
            cost, schedule, kernel, rng.split("sqa", n), replicas, L=L, track_tv=False,
            scan=scan,
        )
        budget = grid.size * steps_per_s * n * L
        sa_sched = default_sa_schedule(n, steps_per_T=max(1, budget // len(default_sa_schedule(n, 1).temperatures)))
        sa_report = run_sa(cost, sa_sched, rng.split("sa", n), sa_replicas)
        s_grid = np.linspace(0.0, 1.0, 41)
        gaps = gap_curve(cost, s_grid)
        s_star = float(s_grid[int(np.argmin(gaps))])
        ind = SpikeIndicator(n=n, zeta=zeta)
        st_mean = L * spike_expectation(cost, s_star, beta, L, ind)
        rows.append(
            {
                "n": n,
                "alpha": alpha,
                "zeta": zeta,
                "beta": beta,
                "L": L,
                "budget_ops": budget,
                "sqa_success": sqa_report.success_rate,
                "sa_success": sa_report.success_rate,
                "oracle_min_gap": float(gaps.min()),
                "oracle_spike_time": st_mean,
                "seed": rng.seed,
            }
        )
    return rows


def separation_csv(rows) -> str:
    lines = [SEPARATION_HEADER]
    for r in rows:
        lines.append(
            ",".join(
                str(r[k])
                for k in (
                    "n", "alpha", "zeta", "beta", "L", "budget_ops",
                    "sqa_success", "sa_success", "oracle_min_gap", "oracle_spike_time", "seed",
                )
            )
        )
    return "\n".join(lines) + "\n"

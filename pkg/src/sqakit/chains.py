"""Explicit finite Markov chains: gaps, canonical paths, and comparison tools.

Everything here operates on dense transition matrices, so it is meant for
desk-scale state spaces (enumerable path-integral instances, planted toy
chains).  The pieces:

* Dirichlet-form spectral gaps of reversible chains;
* congestion of canonical path sets / flows, against the complete-graph
  reference (certifying gap >= 1/congestion) or against a second chain;
* the most-paths comparison: transferring canonical paths from an
  easy-to-analyze chain to a chain whose stationary distribution collapses
  on a low-measure set, producing two-leg flows on a large good set
  together with the congestion and measure guarantees;
* leaky (substochastic) walks on the good set, their filled-in chain, and
  the warm-start convergence inequality
      || mu P_G^t - pi ||_1 <= M t pi(Omega_B) + pi_min^-1 exp(-t / rho).

A convention note: the bad-ratio set is Omega_theta = {x : pi_tilde(x) >
theta * pi(x)}, so that pi_tilde <= theta * pi holds off Omega_theta; that
is the orientation the congestion bound rho <= 16 theta R a^2 rho_tilde
needs (the comparison multiplies easy-chain edge measures by theta to
dominate them with hard-chain ones).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space

from .kernels import transition_matrix
from .worldlines import PathIntegralSystem

__all__ = [
    "ExplicitChain",
    "CanonicalPathSet",
    "ComparisonReport",
    "ComparisonInfeasibleError",
    "LeakyWalkReport",
    "dirichlet_gap",
    "variational_gap",
    "congestion",
    "gap_certificate",
    "CongestionResult",
    "most_paths_comparison",
    "leaky_walk_analysis",
    "substochastic_gap",
    "sqa_explicit_chain",
    "complete_graph_chain",
    "two_state_chain",
    "birth_death_chain",
    "random_reversible_chain",
    "direct_edge_paths",
    "monotone_line_paths",
    "worldline_update_paths",
    "single_site_paths",
]


@dataclass
class ExplicitChain:
    """Row-stochastic matrix with its stationary distribution."""

    P: np.ndarray
    pi: np.ndarray
    name: str = ""

    def __post_init__(self):
        P, pi = np.asarray(self.P, float), np.asarray(self.pi, float)
        if P.ndim != 2 or P.shape[0] != P.shape[1] or pi.shape != (P.shape[0],):
            raise ValueError("P must be square and pi must match its size")
        if np.abs(P.sum(axis=1) - 1.0).max() > 1e-12:
            raise ValueError("rows of P must sum to 1")
        if P.min() < 0:
            raise ValueError("P has negative entries")
        if np.abs(pi @ P - pi).max() > 1e-10:
            raise ValueError("pi is not stationary for P")
        self.P, self.pi = P, pi

    @property
    def size(self) -> int:
        return self.P.shape[0]

    def edge_measure(self) -> np.ndarray:
        """Q(x, y) = pi(x) P(x, y)."""
        return self.pi[:, None] * self.P

    def reversibility_defect(self) -> float:
        Q = self.edge_measure()
        return float(np.abs(Q - Q.T).max())

    @property
    def is_reversible(self) -> bool:
        return self.reversibility_defect() < 1e-10

    def edges(self) -> np.ndarray:
        """Boolean mask of directed off-diagonal edges with P > 0."""
        mask = self.P > 0
        np.fill_diagonal(mask, False)
        return mask


@dataclass(frozen=True)
class PathFlow:
    """One weighted routing for an ordered pair: a state sequence plus the
    length charged to it in congestion sums (nominal lengths may exceed the
    edge count, matching fixed-length path accounting)."""

    states: tuple
    weight: float
    length: float


class CanonicalPathSet:
    """Map from ordered state pairs to a unit-weight set of paths."""

    def __init__(self, flows: dict, name: str = ""):
        self.flows = flows  # (x, y) -> list[PathFlow]
        self.name = name

    def pairs(self):
        return self.flows.keys()

    def validate(self, chain: ExplicitChain, tol: float = 1e-12) -> None:
        """Check weights sum to one, paths are simple, edges exist in P."""
        for (x, y), flows in self.flows.items():
            total = sum(f.weight for f in flows)
            if abs(total - 1.0) > tol:
                raise ValueError(f"pair ({x},{y}) flow weights sum to {total}")
            for f in flows:
                if f.states[0] != x or f.states[-1] != y:
                    raise ValueError(f"path endpoints do not match pair ({x},{y})")
                if len(set(f.states)) != len(f.states):
                    raise ValueError(f"path for ({x},{y}) is not simple")
                for u, v in zip(f.states, f.states[1:]):
                    if chain.P[u, v] <= 0:
                        raise ValueError(f"path for ({x},{y}) uses missing edge ({u},{v})")


@dataclass
class CongestionResult:
    rho: float
    rho_edge: dict  # directed edge -> load / Q(e)
    max_edge: tuple

    def rho_over(self, edge_filter) -> float:
        vals = [v for e, v in self.rho_edge.items() if edge_filter(e)]
        return max(vals) if vals else 0.0


def dirichlet_gap(chain: ExplicitChain) -> float:
    """Spectral gap 1 - lambda_2 of a reversible chain.

    Equals the variational minimum of Dirichlet form over variance.
    """
    if not chain.is_reversible:
        raise ValueError("dirichlet_gap requires a reversible chain")
    rt = np.sqrt(chain.pi)
    A = (rt[:, None] * chain.P) / rt[None, :]
    evals = np.linalg.eigvalsh((A + A.T) / 2.0)
    return float(1.0 - evals[-2])


def variational_gap(chain: ExplicitChain) -> float:
    """inf E(f)/Var(f) for a pi-stationary (not necessarily reversible) chain.

    Uses the additive reversibilization (P + P*)/2, whose Dirichlet form
    coincides with that of P.
    """
    D = chain.pi
    Pstar = (chain.P.T * D[None, :]) / D[:, None]
    sym = ExplicitChain((chain.P + Pstar) / 2.0, chain.pi)
    return dirichlet_gap(sym)


def congestion(chain: ExplicitChain, paths: CanonicalPathSet, reference=None) -> CongestionResult:
    """Congestion of a path set over the chain's edges.

    ``reference=None`` compares against the complete graph with the chain's
    own stationary distribution (pair demand pi(x) pi(y)), certifying
    gap >= 1/rho.  Passing another ExplicitChain uses its edge measure
    Q~(x, y) as the demand, as in chain-comparison bounds.
    """
    Q = chain.edge_measure()
    load: dict = {}
    for (x, y), flows in paths.flows.items():
        if reference is None:
            demand = chain.pi[x] * chain.pi[y]
        else:
            demand = reference.pi[x] * reference.P[x, y]
        if demand == 0.0:
            continue
        for f in flows:
            contrib = demand * f.weight * f.length
            for u, v in zip(f.states, f.states[1:]):
                load[(u, v)] = load.get((u, v), 0.0) + contrib
    rho_edge = {}
    for e, ld in load.items():
        if Q[e] <= 0:
            raise ValueError(f"path set routes over zero-probability edge {e}")
        rho_edge[e] = ld / Q[e]
    max_edge = max(rho_edge, key=rho_edge.get)
    return CongestionResult(rho=rho_edge[max_edge], rho_edge=rho_edge, max_edge=max_edge)


def gap_certificate(chain: ExplicitChain, paths: CanonicalPathSet):
    """Certify gap >= 1/congestion against the complete-graph reference.

    Returns (gap, 1/rho, ok); the complete graph has gap 1 and the same
    stationary distribution, so routing its demand over the chain's edges
    lower-bounds the chain's gap by the inverse congestion.
    """
    rho = congestion(chain, paths).rho
    gap = dirichlet_gap(chain)
    return gap, 1.0 / rho, gap >= 1.0 / rho - 1e-10


# ---------------------------------------------------------------------------
# chain builders


def complete_graph_chain(pi) -> ExplicitChain:
    """P(x, y) = pi(y); gap exactly 1."""
    pi = np.asarray(pi, float)
    pi = pi / pi.sum()
    return ExplicitChain(np.tile(pi, (pi.size, 1)), pi, name="complete")


def two_state_chain(p: float, q: float) -> ExplicitChain:
    P = np.array([[1 - p, p], [q, 1 - q]])
    pi = np.array([q, p]) / (p + q)
    return ExplicitChain(P, pi, name="two-state")


def birth_death_chain(weights, lazy: bool = True) -> ExplicitChain:
    """Lazy Metropolis +-1 walk on a line with target distribution ~ weights."""
    w = np.asarray(weights, float)
    m = w.size
    P = np.zeros((m, m))
    move = 0.25 if lazy else 0.5
    for i in range(m):
        if i + 1 < m:
            P[i, i + 1] = move * min(1.0, w[i + 1] / w[i])
        if i - 1 >= 0:
            P[i, i - 1] = move * min(1.0, w[i - 1] / w[i])
        P[i, i] = 1.0 - P[i].sum()
    return ExplicitChain(P, w / w.sum(), name="birth-death")


def random_reversible_chain(
    m: int, gen: np.random.Generator, bad_states=(), suppression: float = 1.0
) -> ExplicitChain:
    """Lazy reversible chain from a random symmetric conductance matrix.

    ``bad_states`` get their conductances scaled by ``suppression``, planting
    a low-measure set while keeping full support (every off-diagonal
    transition remains possible).
    """
    W = gen.uniform(0.5, 1.5, size=(m, m))
    W = (W + W.T) / 2.0
    for b in bad_states:
        W[b, :] *= suppression
        W[:, b] *= suppression
    np.fill_diagonal(W, W.diagonal())
    d = W.sum(axis=1)
    P = W / d[:, None]
    P = (np.eye(m) + P) / 2.0
    return ExplicitChain(P, d / d.sum(), name="random-reversible")


def sqa_explicit_chain(sys: PathIntegralSystem, kernel: str, max_states: int = 4096):
    """Explicit chain of a sampler kernel on an enumerable instance."""
    P, pi, _ = transition_matrix(sys, kernel, max_states=max_states)
    return ExplicitChain(P, pi, name=f"sqa-{kernel}-n{sys.n}-L{sys.L}")


# ---------------------------------------------------------------------------
# path-set builders


def direct_edge_paths(chain: ExplicitChain) -> CanonicalPathSet:
    """Single-edge paths for every ordered pair; needs full off-diagonal support."""
    m = chain.size
    flows = {}
    for x in range(m):
        for y in range(m):
            if x != y:
                flows[(x, y)] = [PathFlow(states=(x, y), weight=1.0, length=1.0)]
    return CanonicalPathSet(flows, name="direct")


def monotone_line_paths(m: int) -> CanonicalPathSet:
    """Interval paths i -> j along a line graph; length = edge count."""
    flows = {}
    for x in range(m):
        for y in range(m):
            if x == y:
                continue
            step = 1 if y > x else -1
            states = tuple(range(x, y + step, step))
            flows[(x, y)] = [PathFlow(states=states, weight=1.0, length=abs(y - x))]
    return CanonicalPathSet(flows, name="monotone-line")


def _state_worldlines(code: int, n: int, L: int):
    """Split an nL-bit state code into per-worldline L-bit codes."""
    mask = (1 << L) - 1
    return [(code >> (L * (n - 1 - i))) & mask for i in range(n)]


def _join_worldlines(wls, L: int) -> int:
    code = 0
    for w in wls:
        code = (code << L) | w
    return code


def worldline_update_paths(n: int, L: int) -> CanonicalPathSet:
    """Canonical paths of the heat-bath chain: swap worldlines in order 1..n.

    Step k replaces worldline k of the start state by the target's; steps
    where the worldlines already agree are skipped, but every path is charged
    the fixed nominal length n used in the congestion accounting.
    """
    size = 2 ** (n * L)
    flows = {}
    for x in range(size):
        xw = _state_worldlines(x, n, L)
        for y in range(size):
            if x == y:
                continue
            yw = _state_worldlines(y, n, L)
            states = [x]
            cur = list(xw)
            for k in range(n):
                if cur[k] != yw[k]:
                    cur[k] = yw[k]
                    states.append(_join_worldlines(cur, L))
            flows[(x, y)] = [PathFlow(states=tuple(states), weight=1.0, length=float(n))]
    return CanonicalPathSet(flows, name="worldline-order")


def single_site_paths(n: int, L: int) -> CanonicalPathSet:
    """Canonical paths of the Metropolis chain: flip sites in worldline-major
    order (worldline 1 slices 1..L, then worldline 2, ...); nominal length nL."""
    size = 2 ** (n * L)
    nbits = n * L
    flows = {}
    for x in range(size):
        for y in range(size):
            if x == y:
                continue
            states = [x]
            cur = x
            for bit in range(nbits):
                shift = nbits - 1 - bit
                if (cur >> shift) & 1 != (y >> shift) & 1:
                    cur ^= 1 << shift
                    states.append(cur)
            flows[(x, y)] = [PathFlow(states=tuple(states), weight=1.0, length=float(nbits))]
    return CanonicalPathSet(flows, name="site-order")


# ---------------------------------------------------------------------------
# most-paths comparison (transfer of canonical paths between chains)


class ComparisonInfeasibleError(ValueError):
    """Raised when 3 a^2 rho_tilde pi_tilde(Omega_theta) >= 1."""


@dataclass
class ComparisonReport:
    a: float
    theta: float
    R: float
    rho_tilde: float
    omega_theta: np.ndarray
    omega_b: np.ndarray
    omega_g: np.ndarray
    rho: float
    rho_boundary: float
    flow: CanonicalPathSet = field(repr=False)
    feasibility_product: float = 0.0
    pi_good_measured: float = 0.0
    pi_good_bound: float = 0.0
    congestion_bound: float = 0.0
    not_so_bad_lhs: float = 0.0
    not_so_bad_rhs: float = 0.0
    min_intermediate_mass: float = 0.0
    flow_avoids_e_theta: bool = True

    def summary(self) -> dict:
        return {
            "a": self.a,
            "theta": self.theta,
            "R": self.R,
            "rho_tilde": self.rho_tilde,
            "rho": self.rho,
            "rho_boundary": self.rho_boundary,
            "congestion_bound": self.congestion_bound,
            "feasibility_product": self.feasibility_product,
            "pi_good_measured": self.pi_good_measured,
            "pi_good_bound": self.pi_good_bound,
            "n_omega_theta": int(self.omega_theta.sum()),
            "n_omega_b": int(self.omega_b.sum()),
            "not_so_bad_lhs": self.not_so_bad_lhs,
            "not_so_bad_rhs": self.not_so_bad_rhs,
            "min_intermediate_mass": self.min_intermediate_mass,
            "flow_avoids_e_theta": self.flow_avoids_e_theta,
        }


def _loop_erase(states):
    """First-visit loop erasure; keeps the walk's simple skeleton."""
    out = []
    seen = {}
    for s in states:
        if s in seen:
            del out[seen[s] + 1 :]
            for dead in list(seen):
                if seen[dead] > seen[s]:
                    del seen[dead]
        else:
            seen[s] = len(out)
            out.append(s)
    return tuple(out)


def most_paths_comparison(
    easy_chain: ExplicitChain,
    easy_paths: CanonicalPathSet,
    hard: ExplicitChain,
    theta: float,
) -> ComparisonReport:
    """Build two-leg canonical flows for ``hard`` out of ``easy``'s paths.

    Implements the good/bad decomposition: Omega_theta collects states where
    pi_tilde > theta * pi, pairs whose easy path touches an edge incident on
    Omega_theta are "bad", Omega_B holds states with >= 1/(3a) bad-pair mass
    (outgoing or incoming), and every remaining pair (x, y) is routed through
    a pi-weighted random intermediate r whose legs x->r and r->y are both
    good.  Congestion of the hard chain on the resulting flow is measured on
    edges interior to Omega_G and separately on boundary edges, and compared
    against the 16 theta R a^2 rho_tilde guarantee.
    """
    if easy_chain.size != hard.size:
        raise ValueError("chains must share a state space")
    if theta <= 0.0:
        raise ValueError("theta must be positive")
    if any(len(fl) != 1 for fl in easy_paths.flows.values()):
        raise ValueError("the easy chain needs one canonical path per ordered pair")
    m = easy_chain.size
    pi_t, pi_h = easy_chain.pi, hard.pi
    a = float((pi_h / pi_t).max())

    in_theta = pi_t > theta * pi_h
    cong_t = congestion(easy_chain, easy_paths)
    rho_tilde = cong_t.rho

    # pair badness: easy path touches an edge incident on Omega_theta
    bad_pair = np.zeros((m, m), dtype=bool)
    for (x, y), flows in easy_paths.flows.items():
        for f in flows:
            if any(in_theta[s] for s in f.states):
                bad_pair[x, y] = True
                break

    feas = 3.0 * a * a * rho_tilde * float(pi_t[in_theta].sum())
    if feas >= 1.0:
        raise ComparisonInfeasibleError(
            f"3 a^2 rho_tilde pi_tilde(Omega_theta) = {feas:.3g} >= 1; "
            "the comparison hypothesis fails for this pair"
        )

    # not-so-bad: total easy load routed through bad pairs
    lhs = 0.0
    for (x, y), flows in easy_paths.flows.items():
        if bad_pair[x, y]:
            lhs += pi_t[x] * pi_t[y] * sum(f.weight * f.length for f in flows)
    not_so_bad_rhs = rho_tilde * float(pi_t[in_theta].sum())

    bad_out = bad_pair @ pi_t  # pi_tilde(C_B(x)) outgoing
    bad_in = bad_pair.T @ pi_t
    in_b = (bad_out >= 1.0 / (3.0 * a)) | (bad_in >= 1.0 / (3.0 * a))
    in_g = ~in_b
    pi_good = float(pi_h[in_g].sum())
    pi_good_bound = 1.0 - feas

    # R over edges not incident on Omega_theta
    E = easy_chain.edges() | hard.edges()
    inc_theta = in_theta[:, None] | in_theta[None, :]
    usable = E & ~inc_theta
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(usable & (hard.P > 0), easy_chain.P / np.where(hard.P > 0, hard.P, 1.0), 0.0)
    if (usable & (easy_chain.P > 0) & (hard.P <= 0)).any():
        raise ValueError("hard chain is missing an edge the easy chain uses outside E_theta")
    R = float(ratio.max())

    good_idx = np.flatnonzero(in_g)
    good_ok_from = {x: ~bad_pair[x] & in_g for x in good_idx}  # r with (x, r) good
    flows = {}
    min_mass = np.inf
    avoids = True
    for x in good_idx:
        for y in good_idx:
            if x == y:
                continue
            mask = good_ok_from[x] & ~bad_pair[:, y] & in_g
            mass = float(pi_h[mask].sum())
            min_mass = min(min_mass, mass)
            if mass <= 0.0:
                raise ComparisonInfeasibleError(
                    f"no good intermediate exists for pair ({x},{y})"
                )
            rs = np.flatnonzero(mask)
            ws = pi_h[rs] / mass
            grouped = {}
            for r, w in zip(rs, ws):
                leg1 = easy_paths.flows[(x, r)][0] if r != x else None
                leg2 = easy_paths.flows[(r, y)][0] if r != y else None
                states = (leg1.states if leg1 else (x,)) + (leg2.states[1:] if leg2 else ())
                length = (leg1.length if leg1 else 0.0) + (leg2.length if leg2 else 0.0)
                erased = _loop_erase(states)
                if any(in_theta[s] for s in erased):
                    avoids = False
                key = erased
                acc = grouped.get(key)
                if acc is None:
                    grouped[key] = [w, w * length]
                else:
                    acc[0] += w
                    acc[1] += w * length
            flows[(x, y)] = [
                PathFlow(states=st, weight=wsum, length=wlen / wsum)
                for st, (wsum, wlen) in grouped.items()
            ]
    flow_set = CanonicalPathSet(flows, name="two-leg")

    # measured congestion of the hard chain on the new flow
    Q = hard.edge_measure()
    load: dict = {}
    for (x, y), fl in flows.items():
        demand = pi_h[x] * pi_h[y]
        for f in fl:
            contrib = demand * f.weight * f.length
            for u, v in zip(f.states, f.states[1:]):
                load[(u, v)] = load.get((u, v), 0.0) + contrib
    rho_int = 0.0
    rho_bnd = 0.0
    for (u, v), ld in load.items():
        if Q[u, v] <= 0:
            raise ValueError(f"flow uses zero-probability hard edge ({u},{v})")
        val = ld / Q[u, v]
        if in_g[u] and in_g[v]:
            rho_int = max(rho_int, val)
        else:
            rho_bnd = max(rho_bnd, val)

    return ComparisonReport(
        a=a,
        theta=theta,
        R=R,
        rho_tilde=rho_tilde,
        omega_theta=in_theta,
        omega_b=in_b,
        omega_g=in_g,
        rho=rho_int,
        rho_boundary=rho_bnd,
        flow=flow_set,
        feasibility_product=feas,
        pi_good_measured=pi_good,
        pi_good_bound=pi_good_bound,
        congestion_bound=16.0 * theta * R * a * a * rho_tilde,
        not_so_bad_lhs=lhs,
        not_so_bad_rhs=not_so_bad_rhs,
        min_intermediate_mass=float(min_mass),
        flow_avoids_e_theta=avoids,
    )


# ---------------------------------------------------------------------------
# leaky (substochastic) walks


@dataclass
class LeakyWalkReport:
    rho: float
    gap_filled: float
    pi_bad: float
    M: float
    pi_min: float
    t_checked: int
    max_violation: float
    warm_start_violation: float
    fill_in_min: float
    tv_trace: np.ndarray = field(repr=False)
    bound_trace: np.ndarray = field(repr=False)

    @property
    def ok(self) -> bool:
        return self.max_violation <= 1e-12 and self.warm_start_violation <= 1e-12


def _restricted_paths(chain: ExplicitChain, in_g: np.ndarray) -> CanonicalPathSet:
    """Paths connecting all good pairs inside Omega_G: direct edges when the
    restriction has full support, else shortest paths inside Omega_G."""
    good = np.flatnonzero(in_g)
    sub = chain.P[np.ix_(good, good)]
    if (sub[~np.eye(good.size, dtype=bool)] > 0).all():
        flows = {
            (int(x), int(y)): [PathFlow(states=(int(x), int(y)), weight=1.0, length=1.0)]
            for x in good
            for y in good
            if x != y
        }
        return CanonicalPathSet(flows, name="direct-in-G")
    # BFS inside the good set
    adj = {int(x): [int(y) for y in good if y != x and chain.P[x, y] > 0] for x in good}
    flows = {}
    for src in good:
        prev = {int(src): None}
        order = [int(src)]
        for u in order:
            for v in adj[u]:
                if v not in prev:
                    prev[v] = u
                    order.append(v)
        for dst in good:
            if dst == src:
                continue
            if int(dst) not in prev:
                raise ValueError("Omega_G is disconnected under the chain's edges")
            states = [int(dst)]
            while states[-1] != int(src):
                states.append(prev[states[-1]])
            states.reverse()
            flows[(int(src), int(dst))] = [
                PathFlow(states=tuple(states), weight=1.0, length=float(len(states) - 1))
            ]
    return CanonicalPathSet(flows, name="bfs-in-G")


def _good_set_congestion(chain: ExplicitChain, in_g: np.ndarray, paths: CanonicalPathSet) -> float:
    """Congestion of the full chain's edge measure on paths inside Omega_G,
    with full-pi pair demands, as used by the substochastic comparison."""
    Q = chain.edge_measure()
    load: dict = {}
    for (x, y), fl in paths.flows.items():
        if not (in_g[x] and in_g[y]):
            continue
        demand = chain.pi[x] * chain.pi[y]
        for f in fl:
            contrib = demand * f.weight * f.length
            for u, v in zip(f.states, f.states[1:]):
                if not (in_g[u] and in_g[v]):
                    raise ValueError("restricted path leaves Omega_G")
                load[(u, v)] = load.get((u, v), 0.0) + contrib
    return max(ld / Q[e] for e, ld in load.items())


def substochastic_gap(chain: ExplicitChain, in_g: np.ndarray, paths: CanonicalPathSet | None = None):
    """Certify the restricted quadratic-form comparison on Omega_G.

    Returns (gap_G, rho, ok).  For |Omega_G| > 1, gap_G is the smallest
    eigenvalue of the pi-symmetrized form of I - P restricted to Omega_G
    *orthogonal to the quasi-stationary direction* sqrt(pi)|_G; the
    canonical-path comparison lower-bounds that eigenvalue by 1/rho.  (On
    the quasi-stationary direction itself the form value is the leakage
    rate, which no path bound controls; the filled-in chain analysis is
    what removes that direction.)  For a single-state Omega_G the raw form
    value 1 - P(x, x) is returned and the certificate is vacuous.
    """
    if paths is None:
        paths = _restricted_paths(chain, in_g)
    good = np.flatnonzero(in_g)
    rt = np.sqrt(chain.pi)
    A = (rt[:, None] * chain.P) / rt[None, :]
    A = (A + A.T) / 2.0
    block = np.eye(good.size) - A[np.ix_(good, good)]
    if good.size == 1:
        return float(block[0, 0]), np.inf, True
    rho = _good_set_congestion(chain, in_g, paths)
    v = rt[good]
    basis = null_space(v[None, :])
    gap_g = float(np.linalg.eigvalsh(basis.T @ block @ basis)[0])
    return gap_g, rho, gap_g >= 1.0 / rho - 1e-10


def leaky_walk_analysis(
    chain: ExplicitChain,
    in_g: np.ndarray,
    mu: np.ndarray,
    t_max: int,
    paths: CanonicalPathSet | None = None,
) -> LeakyWalkReport:
    """Run the substochastic walk on Omega_G and verify the mixing bound.

    Builds P_G (walkers absorbed on leaving Omega_G), the fill-in measure
    phi = pi (I - P_G) and the filled-in chain P_F = P_G + 1 phi; checks that
    pi is stationary for P_F, that the filled-in variational gap is at least
    1/rho, that the warm-start domination mu P_G^t <= mu P_F^t <= M pi is
    preserved, and that at every t <= t_max

        || mu P_G^t - pi ||_1 <= M t pi(Omega_B) + pi_min^-1 exp(-t / rho).
    """
    in_g = np.asarray(in_g, bool)
    mu = np.asarray(mu, float)
    if mu.min() < 0 or abs(mu.sum() - 1.0) > 1e-12:
        raise ValueError("mu must be a probability vector")
    if mu[~in_g].max(initial=0.0) > 0:
        raise ValueError("mu must be supported on Omega_G")
    pi = chain.pi
    M = float((mu[in_g] / pi[in_g]).max())
    P_G = chain.P * (in_g[:, None] & in_g[None, :])
    phi = pi - pi @ P_G
    if phi.min() < -1e-14:
        raise ValueError("fill-in measure has negative entries; Omega_G inconsistent with P")
    # P_F = P_G + 1 phi: pi-stationary by construction (rows carry the full
    # fill-in measure, so row sums differ from 1, but every property checked
    # below only uses nonnegativity and pi P_F = pi).
    P_F = P_G + np.ones_like(pi)[:, None] * phi[None, :]
    if np.abs(pi @ P_F - pi).max() > 1e-10:
        raise ValueError("filled-in chain does not preserve pi")
    # Dirichlet gap of P_F: on the subspace orthogonal to 1 in <.,.>_pi the
    # rank-one part vanishes, so E_F(f) = <(I - P_G) f, f>_pi there.
    rt = np.sqrt(pi)
    B = (rt[:, None] * P_G) / rt[None, :]
    Msym = np.eye(pi.size) - (B + B.T) / 2.0
    basis = null_space(rt[None, :])  # orthonormal basis of sqrt(pi)-perp
    gap_f = float(np.linalg.eigvalsh(basis.T @ Msym @ basis)[0])
    if paths is None:
        paths = _restricted_paths(chain, in_g)
    rho = _good_set_congestion(chain, in_g, paths)

    pi_bad = float(pi[~in_g].sum())
    pi_min = float(pi.min())
    dist_g = mu.copy()
    dist_f = mu.copy()
    tv = np.empty(t_max + 1)
    bound = np.empty(t_max + 1)
    warm_viol = 0.0
    max_viol = 0.0
    for t in range(t_max + 1):
        tv[t] = np.abs(dist_g - pi).sum()
        bound[t] = M * t * pi_bad + np.exp(-t / rho) / pi_min
        max_viol = max(max_viol, tv[t] - bound[t])
        warm_viol = max(
            warm_viol,
            float((dist_g - dist_f).max()),
            float((dist_f - M * pi).max()),
        )
        if t < t_max:
            dist_g = dist_g @ P_G
            dist_f = dist_f @ P_F
    return LeakyWalkReport(
        rho=rho,
        gap_filled=gap_f,
        pi_bad=pi_bad,
        M=M,
        pi_min=pi_min,
        t_checked=t_max,
        max_violation=float(max_viol),
        warm_start_violation=float(warm_viol),
        fill_in_min=float(phi.min()),
        tv_trace=tv,
        bound_trace=bound,
    )

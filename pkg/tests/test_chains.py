import math

import numpy as np
import pytest

from sqakit import chains
from sqakit.costs import make_custom_cost, make_spikeless_cost
from sqakit.kernels import HEAT_BATH, METROPOLIS
from sqakit.worldlines import PathIntegralSystem, WorldlineConfiguration


def make_toy_pair(N=60, bias=0.25, lo=40, hi=51, drop=18.0):
    w_easy = np.exp(-bias * np.arange(N))
    w_hard = w_easy.copy()
    w_hard[lo:hi] *= math.exp(-drop)
    band = np.zeros(N, bool)
    band[lo:hi] = True
    return chains.birth_death_chain(w_easy), chains.birth_death_chain(w_hard), band


def make_sqa_pair(beta=12.0, s=0.75, L=3, bump=1.0):
    n = 2
    easy_sys = PathIntegralSystem(cost=make_spikeless_cost(n), L=L, beta=beta, s=s)
    hard_sys = PathIntegralSystem(
        cost=make_custom_cost([0.0, 1.0 + bump, 2.0]), L=L, beta=beta, s=s
    )
    easy = chains.sqa_explicit_chain(easy_sys, HEAT_BATH)
    hard = chains.sqa_explicit_chain(hard_sys, HEAT_BATH)
    sts = np.array(
        [
            int((WorldlineConfiguration.from_integer(z, n, L).slice_weights == 1).sum())
            for z in range(2 ** (n * L))
        ]
    )
    return easy, hard, sts


# ---------------------------------------------------------------- gaps


def test_complete_graph_gap_is_one(rng):
    pi = rng.random(12) + 0.1
    ch = chains.complete_graph_chain(pi)
    assert chains.dirichlet_gap(ch) == pytest.approx(1.0, abs=1e-12)


def test_two_state_gap_closed_form():
    assert chains.dirichlet_gap(chains.two_state_chain(0.3, 0.45)) == pytest.approx(0.75)


def test_lazy_chain_halves_gap(rng):
    ch = chains.random_reversible_chain(15, rng)
    lazy = chains.ExplicitChain((np.eye(15) + ch.P) / 2, ch.pi)
    assert chains.dirichlet_gap(lazy) == pytest.approx(chains.dirichlet_gap(ch) / 2, abs=1e-12)


def test_dirichlet_gap_equals_variational(rng):
    ch = chains.random_reversible_chain(10, rng)
    gap = chains.dirichlet_gap(ch)
    # crude variational probe from many random directions never beats the gap
    pi = ch.pi
    best = np.inf
    for _ in range(200):
        f = rng.standard_normal(10)
        f -= (pi * f).sum()
        var = (pi * f**2).sum()
        E = f @ (np.diag(pi) @ (np.eye(10) - ch.P)) @ f
        best = min(best, E / var)
    assert best >= gap - 1e-12
    assert best < gap * 1.5


def test_dirichlet_gap_rejects_nonreversible():
    P = np.array([[0.1, 0.9, 0.0], [0.0, 0.1, 0.9], [0.9, 0.0, 0.1]])
    pi = np.ones(3) / 3
    with pytest.raises(ValueError):
        chains.dirichlet_gap(chains.ExplicitChain(P, pi))


# ---------------------------------------------------------------- congestion


def test_complete_graph_direct_paths_rho_one(rng):
    ch = chains.complete_graph_chain(rng.random(9) + 0.2)
    res = chains.congestion(ch, chains.direct_edge_paths(ch))
    assert res.rho == pytest.approx(1.0, abs=1e-12)
    assert all(abs(v - 1.0) < 1e-12 for v in res.rho_edge.values())


def test_gap_vs_congestion_certificate(rng):
    # lambda >= 1/rho on random full-support reversible chains
    for _ in range(100):
        m = int(rng.integers(4, 60))
        ch = chains.random_reversible_chain(m, rng)
        gap, lower, ok = chains.gap_certificate(ch, chains.direct_edge_paths(ch))
        assert ok and gap >= lower - 1e-10


def test_chain_comparison_inequality(rng):
    # lambda_tilde <= [max pi/pi_tilde] rho lambda on random pairs
    for _ in range(25):
        m = int(rng.integers(4, 30))
        a = chains.random_reversible_chain(m, rng)
        b = chains.random_reversible_chain(m, rng)
        rho = chains.congestion(a, chains.direct_edge_paths(a), reference=b).rho
        lam_a = chains.dirichlet_gap(a)
        lam_b = chains.dirichlet_gap(b)
        scale = (a.pi / b.pi).max()
        assert lam_b <= scale * rho * lam_a + 1e-10


def test_heat_bath_congestion_exact_2n2():
    sys = PathIntegralSystem(cost=make_spikeless_cost(2), L=3, beta=2.0, s=0.5)
    ch = chains.sqa_explicit_chain(sys, HEAT_BATH)
    paths = chains.worldline_update_paths(2, 3)
    paths.validate(ch)
    res = chains.congestion(ch, paths)
    vals = np.array(list(res.rho_edge.values()))
    assert np.abs(vals - 8.0).max() < 1e-9
    assert res.rho == pytest.approx(8.0, abs=1e-9)


def test_heat_bath_congestion_exact_other_shape():
    sys = PathIntegralSystem(cost=make_spikeless_cost(3), L=2, beta=1.5, s=0.4)
    ch = chains.sqa_explicit_chain(sys, HEAT_BATH)
    res = chains.congestion(ch, chains.worldline_update_paths(3, 2))
    assert res.rho == pytest.approx(2 * 9.0, abs=1e-9)


def test_metropolis_congestion_and_encoding_ingredients():
    sys = PathIntegralSystem(cost=make_spikeless_cost(1), L=4, beta=2.0, s=0.5)
    ch = chains.sqa_explicit_chain(sys, METROPOLIS)
    paths = chains.single_site_paths(1, 4)
    paths.validate(ch)
    res = chains.congestion(ch, paths)
    assert np.isfinite(res.rho) and res.rho > 0
    # encoding ingredient: along any path step, the intermediate z and the
    # encoding image eta = x XOR y XOR z each break at most 2 bonds not
    # present in x or y, i.e. 4 extra in total (exhaustively sharp here),
    # giving pi(x) pi(y) <= coth(omega)^4 pi(z) pi(eta) for the ramp cost
    def jumps(code):
        return int(WorldlineConfiguration.from_integer(code, 1, 4).jump_counts.sum())

    lw = lambda c: math.log(ch.pi[c])
    slack_seen = 0
    for (x, y), flows in paths.flows.items():
        st = flows[0].states
        for z, znext in zip(st, st[1:]):
            eta = x ^ y ^ z
            extra = jumps(z) + jumps(eta) - jumps(x) - jumps(y)
            assert extra <= 4
            slack_seen = max(slack_seen, extra)
            assert lw(x) + lw(y) <= lw(z) + lw(eta) - 4 * math.log(math.tanh(sys.omega)) + 1e-9
    assert slack_seen == 4  # the worst case is realized


def test_congestion_rejects_zero_probability_edge():
    ch = chains.birth_death_chain(np.ones(4))
    flows = {(0, 3): [chains.PathFlow(states=(0, 3), weight=1.0, length=1.0)]}
    with pytest.raises(ValueError):
        chains.congestion(ch, chains.CanonicalPathSet(flows))


# ---------------------------------------------------------------- most-paths


def test_most_paths_identical_chains_degenerate(rng):
    ch = chains.random_reversible_chain(12, rng)
    paths = chains.direct_edge_paths(ch)
    rep = chains.most_paths_comparison(ch, paths, ch, theta=1.5)
    assert rep.a == pytest.approx(1.0, abs=1e-12)
    assert rep.omega_theta.sum() == 0
    assert rep.omega_b.sum() == 0
    assert rep.pi_good_measured == pytest.approx(1.0)
    assert rep.R == pytest.approx(1.0, abs=1e-12)
    assert rep.rho <= 16 * rep.theta * rep.a**2 * rep.rho_tilde + 1e-10
    assert rep.flow_avoids_e_theta


def test_most_paths_toy_pair_inequalities():
    easy, hard, band = make_toy_pair()
    paths = chains.monotone_line_paths(easy.size)
    ratio = easy.pi / hard.pi
    theta = float(ratio[~band].max()) * (1 + 1e-9)
    rep = chains.most_paths_comparison(easy, paths, hard, theta)
    assert np.array_equal(rep.omega_theta, band)
    assert rep.feasibility_product < 1.0
    assert rep.rho <= rep.congestion_bound + 1e-10
    assert rep.pi_good_measured >= rep.pi_good_bound - 1e-10
    assert rep.not_so_bad_lhs <= rep.not_so_bad_rhs + 1e-10
    assert rep.min_intermediate_mass >= 0.25
    assert rep.flow_avoids_e_theta
    # flow validity: weights sum to one and paths ride existing edges
    rep.flow.validate(hard)


def test_most_paths_sqa_pair_inequalities():
    easy, hard, sts = make_sqa_pair()
    paths = chains.worldline_update_paths(2, 3)
    ratio = easy.pi / hard.pi
    in_theta = sts >= 3
    theta = float(ratio[~in_theta].max()) * (1 + 1e-12)
    rep = chains.most_paths_comparison(easy, paths, hard, theta)
    assert np.array_equal(rep.omega_theta, in_theta)
    assert rep.rho_tilde == pytest.approx(8.0, abs=1e-9)
    assert rep.feasibility_product < 1.0
    assert rep.rho <= rep.congestion_bound + 1e-10
    assert rep.pi_good_measured >= rep.pi_good_bound - 1e-10
    assert rep.not_so_bad_lhs <= rep.not_so_bad_rhs + 1e-10
    assert rep.flow_avoids_e_theta
    rep.flow.validate(hard)


def test_most_paths_infeasible_uniform_toy():
    # a uniform easy chain has rho_tilde ~ N^2 while the suppressed band keeps
    # its full pi_tilde mass: the hypothesis 3 a^2 rho_tilde pi_tilde < 1 fails
    N = 60
    w_easy = np.ones(N)
    w_hard = w_easy.copy()
    w_hard[25:35] *= math.exp(-20.0)
    easy = chains.birth_death_chain(w_easy)
    hard = chains.birth_death_chain(w_hard)
    paths = chains.monotone_line_paths(N)
    band = np.zeros(N, bool)
    band[25:35] = True
    theta = float((easy.pi / hard.pi)[~band].max()) * (1 + 1e-9)
    with pytest.raises(chains.ComparisonInfeasibleError):
        chains.most_paths_comparison(easy, paths, hard, theta)


# ---------------------------------------------------------------- leaky walks


def test_leaky_no_bad_set(rng):
    ch = chains.random_reversible_chain(20, rng)
    rep = chains.leaky_walk_analysis(ch, np.ones(20, bool), ch.pi.copy(), t_max=300)
    assert rep.pi_bad == 0.0
    assert rep.max_violation <= 1e-12
    assert rep.gap_filled >= 1.0 / rep.rho - 1e-10


def test_leaky_trap_chain(rng):
    bad = np.array([3, 17])
    ch = chains.random_reversible_chain(50, rng, bad_states=bad, suppression=2e-3)
    in_g = np.ones(50, bool)
    in_g[bad] = False
    mu = np.where(in_g, ch.pi, 0.0)
    mu /= mu.sum()
    rep = chains.leaky_walk_analysis(ch, in_g, mu, t_max=10_000)
    assert rep.pi_bad < 5e-3
    assert rep.max_violation <= 1e-12
    assert rep.warm_start_violation <= 1e-12
    assert rep.gap_filled >= 1.0 / rep.rho - 1e-10
    assert rep.fill_in_min >= -1e-14
    gap_g, rho, ok = chains.substochastic_gap(ch, in_g)
    assert ok
    assert gap_g >= 1.0 / rho - 1e-10


def test_leaky_point_mass_start(rng):
    bad = np.array([7])
    ch = chains.random_reversible_chain(30, rng, bad_states=bad, suppression=1e-3)
    in_g = np.ones(30, bool)
    in_g[bad] = False
    mu = np.zeros(30)
    mu[0] = 1.0
    rep = chains.leaky_walk_analysis(ch, in_g, mu, t_max=3000)
    assert rep.M == pytest.approx(1.0 / ch.pi[0])
    assert rep.max_violation <= 1e-12


def test_leaky_rejects_bad_support(rng):
    ch = chains.random_reversible_chain(10, rng)
    in_g = np.ones(10, bool)
    in_g[4] = False
    mu = np.ones(10) / 10
    with pytest.raises(ValueError):
        chains.leaky_walk_analysis(ch, in_g, mu, t_max=10)


def test_substochastic_gap_full_chain_reduces(rng):
    ch = chains.random_reversible_chain(12, rng)
    gap_g, rho, ok = chains.substochastic_gap(ch, np.ones(12, bool))
    assert ok
    assert gap_g == pytest.approx(chains.dirichlet_gap(ch), abs=1e-10)


def test_substochastic_gap_single_state(rng):
    ch = chains.random_reversible_chain(6, rng)
    in_g = np.zeros(6, bool)
    in_g[2] = True
    gap_g, rho, ok = chains.substochastic_gap(ch, in_g)
    assert gap_g == pytest.approx(1.0 - ch.P[2, 2], abs=1e-12)
    assert ok


def test_filled_chain_fill_in_cancellation(rng):
    # the rank-one fill-in vanishes against zero-sum measures, so
    # mu P_F - pi = (mu - pi) P_G exactly after one step; afterwards the
    # deviation is second order in the leak rate
    bad = np.array([5])
    ch = chains.random_reversible_chain(20, rng, bad_states=bad, suppression=1e-3)
    in_g = np.ones(20, bool)
    in_g[bad] = False
    P_G = ch.P * (in_g[:, None] & in_g[None, :])
    phi = ch.pi - ch.pi @ P_G
    P_F = P_G + np.ones(20)[:, None] * phi[None, :]
    mu = np.where(in_g, ch.pi, 0.0)
    mu /= mu.sum()
    assert np.abs((mu @ P_F - ch.pi) - (mu - ch.pi) @ P_G).max() < 1e-15
    lhs = mu.copy()
    rhs = mu - ch.pi
    leak = float(phi[in_g].sum() + ch.pi[~in_g].sum())
    for _ in range(50):
        lhs = lhs @ P_F
        rhs = rhs @ P_G
    assert np.abs((lhs - ch.pi) - rhs).max() < 50 * leak**2

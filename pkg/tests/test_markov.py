"""Rate-network entropy production tests."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from driftlab.errors import ConfigError, NotStronglyConnectedError
from driftlab.markov import (
    cycle_affinity,
    cycle_basis,
    cycle_report_rows,
    detailed_balance_check,
    dump_edge_list,
    edge_currents,
    entropy_production,
    load_edge_list,
    potential_rates,
    rate_matrix,
    stationary_distribution,
)

from oracles import jump_chain_occupation


def driven_ring(n: int, k_fwd: float = 2.0, k_bwd: float = 1.0):
    rates = np.zeros((n, n))
    for i in range(n):
        rates[i, (i + 1) % n] = k_fwd
        rates[(i + 1) % n, i] = k_bwd
    return rate_matrix(rates)


def random_reversible(rng: np.random.Generator, n: int, extra_edges: int = 0):
    """Random connected reversible network: random tree plus extra chords."""
    rates = np.zeros((n, n))
    order = rng.permutation(n)
    for idx in range(1, n):
        i = int(order[idx])
        j = int(order[rng.integers(idx)])
        rates[i, j] = rng.lognormal(0.0, 0.7)
        rates[j, i] = rng.lognormal(0.0, 0.7)
    added = 0
    attempts = 0
    while added < extra_edges and attempts < 50 * (extra_edges + 1):
        attempts += 1
        i, j = rng.integers(n, size=2)
        if i == j or rates[i, j] > 0:
            continue
        rates[i, j] = rng.lognormal(0.0, 0.7)
        rates[j, i] = rng.lognormal(0.0, 0.7)
        added += 1
    return rate_matrix(rates)


class TestValidation:
    def test_asymmetric_zero_pattern_rejected(self):
        rates = np.array([[0.0, 1.0], [0.0, 0.0]])
        with pytest.raises(ConfigError, match="not reversible"):
            rate_matrix(rates)

    def test_negative_rate_rejected(self):
        rates = np.array([[0.0, -1.0], [1.0, 0.0]])
        with pytest.raises(ConfigError, match="nonnegative"):
            rate_matrix(rates)

    def test_disconnected_names_components(self):
        rates = np.zeros((4, 4))
        rates[0, 1] = rates[1, 0] = 1.0
        rates[2, 3] = rates[3, 2] = 1.0
        with pytest.raises(NotStronglyConnectedError) as err:
            rate_matrix(rates)
        comps = err.value.components
        assert sorted(sorted(c) for c in comps) == [[0, 1], [2, 3]]


class TestStationary:
    def test_two_state_closed_form(self):
        # p1/p0 = k01/k10
        rm = rate_matrix([[0.0, 3.0], [1.0, 0.0]])
        p = stationary_distribution(rm)
        assert np.allclose(p, [0.25, 0.75], atol=1e-12)

    def test_uniform_on_symmetric_ring(self):
        rm = driven_ring(5, 2.0, 2.0)
        p = stationary_distribution(rm)
        assert np.allclose(p, 0.2, atol=1e-12)

    def test_global_balance(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            rm = random_reversible(rng, int(rng.integers(3, 12)), 3)
            p = stationary_distribution(rm)
            from driftlab.markov import generator_matrix

            assert np.abs(p @ generator_matrix(rm)).max() < 1e-12
            assert np.all(p > 0)

    def test_matches_jump_chain_occupation(self):
        # independent Monte Carlo oracle: long simulated jump chain
        rng = np.random.default_rng(11)
        rm = random_reversible(rng, 6, 4)
        p = stationary_distribution(rm)
        occ = jump_chain_occupation(rm.rates, 1_000_000, np.random.default_rng(5))
        assert np.abs(occ - p).max() < 1e-2


class TestCycles:
    def test_chord_count(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            n = int(rng.integers(3, 15))
            rm = random_reversible(rng, n, int(rng.integers(0, 6)))
            basis = cycle_basis(rm)
            assert len(basis.cycles) == len(rm.edges()) - n + 1

    def test_cycles_are_closed_loops(self):
        rng = np.random.default_rng(13)
        rm = random_reversible(rng, 8, 5)
        basis = cycle_basis(rm)
        for cyc in basis.cycles:
            for (a, b), (c, d) in zip(cyc.edges, cyc.edges[1:]):
                assert b == c
            assert cyc.edges[-1][1] == cyc.edges[0][0]

    def test_ring_affinity(self):
        rm = driven_ring(3)
        basis = cycle_basis(rm)
        assert len(basis.cycles) == 1
        a = cycle_affinity(rm, basis.cycles[0])
        assert abs(abs(a) - 3 * np.log(2.0)) < 1e-12


class TestDetailedBalance:
    def test_two_state_always_balanced(self):
        rm = rate_matrix([[0.0, 5.0], [0.3, 0.0]])
        ok, worst = detailed_balance_check(rm)
        assert ok and worst == 0.0  # no cycles at all

    def test_potential_rates_balanced(self):
        rng = np.random.default_rng(23)
        v = rng.normal(size=7)
        edges = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 0), (1, 4)]
        rm = potential_rates(v, edges)
        ok, worst = detailed_balance_check(rm)
        assert ok
        assert worst < 1e-12

    def test_driven_ring_not_balanced(self):
        ok, worst = detailed_balance_check(driven_ring(4))
        assert not ok
        assert abs(worst - 4 * np.log(2.0)) < 1e-12

    def test_verdict_independent_of_spanning_tree(self):
        rng = np.random.default_rng(17)
        for case in range(6):
            rm = random_reversible(rng, 9, 5)
            if case % 2 == 0:
                # drive one chord to break balance
                basis = cycle_basis(rm)
                if basis.cycles:
                    u, v = basis.cycles[0].chord
                    rates = rm.rates.copy()
                    rates[u, v] *= np.e
                    rm = rate_matrix(rates)
            verdicts = {
                detailed_balance_check(rm, rng=np.random.default_rng(1000 + t))[0]
                for t in range(3)
            }
            assert len(verdicts) == 1


class TestEntropyProduction:
    def test_driven_three_ring_log2(self):
        # uniform stationary state, one cycle, affinity 3 ln 2, current 1/3
        report = entropy_production(driven_ring(3))
        assert abs(report.sigma_total - np.log(2.0)) < 1e-10
        assert abs(report.sigma_cycle - np.log(2.0)) < 1e-10

    def test_balanced_network_zero(self):
        rng = np.random.default_rng(29)
        v = rng.normal(size=6)
        edges = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (0, 3)]
        report = entropy_production(potential_rates(v, edges))
        assert abs(report.sigma_total) < 1e-12

    def test_edge_and_cycle_forms_agree(self):
        rng = np.random.default_rng(31)
        for _ in range(50):
            rm = random_reversible(rng, int(rng.integers(3, 14)), int(rng.integers(0, 7)))
            report = entropy_production(rm)
            scale = max(1.0, abs(report.sigma_edge))
            assert abs(report.sigma_edge - report.sigma_cycle) <= 1e-9 * scale
            assert report.sigma_total >= -1e-15

    def test_cycle_currents_reproduce_edge_currents(self):
        # the chord-current decomposition must rebuild every edge current
        rng = np.random.default_rng(37)
        rm = random_reversible(rng, 8, 6)
        p = stationary_distribution(rm)
        current = edge_currents(rm, p)
        basis = cycle_basis(rm)
        rebuilt = np.zeros_like(current)
        for cyc in basis.cycles:
            u, v = cyc.chord
            j_c = current[u, v]
            for a, b in cyc.edges:
                rebuilt[a, b] += j_c
                rebuilt[b, a] -= j_c
        assert np.abs(rebuilt - current).max() < 1e-14

    def test_report_rows(self):
        report = entropy_production(driven_ring(3))
        rows = cycle_report_rows(report)
        assert len(rows) == 1
        cid, ci, cj, aff, cur, contrib = rows[0]
        assert cid == 0
        assert abs(contrib - report.sigma_cycle) < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_entropy_nonnegative_and_forms_agree(seed):
    rng = np.random.default_rng(seed)
    rm = random_reversible(rng, int(rng.integers(3, 10)), int(rng.integers(0, 5)))
    report = entropy_production(rm)
    assert report.sigma_total >= -1e-15
    scale = max(1.0, abs(report.sigma_edge))
    assert abs(report.sigma_edge - report.sigma_cycle) <= 1e-9 * scale


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_potential_networks_balanced(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 10))
    v = rng.normal(size=n)
    edges = [(i, i + 1) for i in range(n - 1)] + [(n - 1, 0)]
    ok, worst = detailed_balance_check(potential_rates(v, edges))
    assert ok


class TestEdgeListIO:
    def test_roundtrip(self, tmp_path):
        rm = driven_ring(4)
        path = str(tmp_path / "net.edges")
        dump_edge_list(rm, path)
        back = load_edge_list(path)
        assert np.array_equal(back.rates, rm.rates)

    def test_comments_and_blanks(self, tmp_path):
        path = tmp_path / "net.edges"
        path.write_text("# a ring\n0 1 2.0  # forward\n\n1 0 1.0\n")
        rm = load_edge_list(str(path))
        assert rm.rates[0, 1] == 2.0

    def test_malformed_line(self, tmp_path):
        path = tmp_path / "bad.edges"
        path.write_text("0 1\n")
        with pytest.raises(ConfigError, match="bad.edges:1"):
            load_edge_list(str(path))

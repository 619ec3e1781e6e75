import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dscosim.errors import AssumptionError, ConfigurationError
from dscosim.topology import (
    DirectedGraph,
    build_weight_pair,
    check_assumption2,
    contraction_factor,
    generate_ring_plus_random,
    underlying_metropolis,
)


def ring(n):
    return generate_ring_plus_random(n, 0, 0)


class TestGenerateRing:
    def test_pure_ring_3(self):
        g = ring(3)
        assert g.edges == frozenset({(1, 2), (2, 3), (3, 1)})

    def test_single_node(self):
        g = ring(1)
        assert g.n == 1 and g.edges == frozenset()

    def test_extra_edges_counted_and_distinct(self):
        g = generate_ring_plus_random(5, 3, seed=7)
        assert len(g.edges) == 5 + 3
        assert len(set(g.edges)) == len(g.edges)

    def test_deterministic_given_seed(self):
        a = generate_ring_plus_random(6, 4, seed=3)
        b = generate_ring_plus_random(6, 4, seed=3)
        assert a.edges == b.edges

    def test_too_many_extra_rejected(self):
        # n=3: 6 ordered non-self pairs, 3 in the ring
        generate_ring_plus_random(3, 3, 0)
        with pytest.raises(ConfigurationError):
            generate_ring_plus_random(3, 4, 0)


class TestEdgeListRoundTrip:
    def test_round_trip(self):
        g = generate_ring_plus_random(5, 3, seed=1)
        assert DirectedGraph.from_edge_list(g.to_edge_list()) == g

    def test_self_loops_not_listed(self):
        assert "1 1" not in ring(3).to_edge_list()


class TestAssumption2:
    def test_ring_strongly_connected(self):
        assert check_assumption2(ring(3), ring(3))

    def test_self_loops_only_fails(self):
        g = DirectedGraph(2)
        assert not check_assumption2(g, g)

    def test_disjoint_root_sets(self):
        star1 = DirectedGraph(3, {(1, 2), (1, 3)})
        star2 = DirectedGraph(3, {(2, 1), (2, 3)})
        assert check_assumption2(star1, star1)
        assert not check_assumption2(star1, star2)

    def brute_force_roots(self, g):
        # all-pairs reachability by repeated squaring of the boolean adjacency
        n = g.n
        adj = np.eye(n, dtype=bool)
        for j, i in g.edges:
            adj[j - 1, i - 1] = True
        reach = adj.copy()
        for _ in range(n):
            reach = reach | (reach @ adj)
        return {r + 1 for r in range(n) if reach[r].all()}

    @given(
        n=st.integers(2, 5),
        edges=st.sets(st.tuples(st.integers(1, 5), st.integers(1, 5)), max_size=12),
        seed=st.integers(0, 100),
    )
    @settings(max_examples=150, deadline=None)
    def test_roots_match_brute_force(self, n, edges, seed):
        edges = {(j, i) for j, i in edges if j <= n and i <= n and j != i}
        g = DirectedGraph(n, frozenset(edges))
        assert g.roots() == self.brute_force_roots(g)


def power_iteration_left(A, iters=20000):
    n = A.shape[0]
    u = np.ones(n)
    for _ in range(iters):
        u = A.T @ u
        u *= n / u.sum()
    return u


class TestBuildWeightPair:
    def test_ring_uniform_doubly_stochastic(self):
        wp = build_weight_pair(ring(3), ring(3))
        expected = np.array([[0.5, 0.0, 0.5], [0.5, 0.5, 0.0], [0.0, 0.5, 0.5]])
        np.testing.assert_allclose(wp.A, expected)
        np.testing.assert_allclose(wp.u, np.ones(3), atol=1e-10)
        np.testing.assert_allclose(wp.v, np.ones(3), atol=1e-10)

    def test_ring_u_matches_power_iteration_oracle(self):
        wp = build_weight_pair(ring(4), ring(4))
        np.testing.assert_allclose(wp.u, power_iteration_left(wp.A), atol=1e-9)

    def test_single_node(self):
        g = DirectedGraph(1)
        wp = build_weight_pair(g, g)
        np.testing.assert_allclose(wp.A, [[1.0]])
        np.testing.assert_allclose(wp.B, [[1.0]])
        assert wp.tau_A == 0.0 and wp.tau_B == 0.0

    def test_assumption_violation_named(self):
        g = DirectedGraph(2)
        with pytest.raises(AssumptionError, match="spanning tree"):
            build_weight_pair(g, g)

    @pytest.mark.parametrize("seed", range(10))
    def test_invariants_random_graphs(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 30))
        extra = int(rng.integers(0, n))
        g = generate_ring_plus_random(n, extra, seed)
        wp = build_weight_pair(g, g)
        ones = np.ones(n)
        assert np.max(np.abs(wp.A @ ones - ones)) < 1e-12
        assert np.max(np.abs(ones @ wp.B - ones)) < 1e-12
        assert np.all(np.diag(wp.A) > 0) and np.all(np.diag(wp.B) > 0)
        assert np.max(np.abs(wp.u @ wp.A - wp.u)) < 1e-10
        assert np.max(np.abs(wp.B @ wp.v - wp.v)) < 1e-10
        assert abs(wp.u.sum() - n) < 1e-10 and abs(wp.v.sum() - n) < 1e-10
        assert np.all(wp.u >= 0) and np.all(wp.v >= 0)
        assert wp.u @ wp.v > 0
        assert wp.tau_A < 1 and wp.tau_B < 1

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_empirical_geometric_mixing(self, seed):
        g = generate_ring_plus_random(8, 4, seed)
        wp = build_weight_pair(g, g)
        n = wp.n
        C = wp.A - np.outer(np.ones(n), wp.u) / n
        rng = np.random.default_rng(seed + 100)
        x = rng.normal(size=n)
        rate = wp.tau_A + 0.05
        v = x.copy()
        for m in range(1, 51):
            v = C @ v
            assert np.linalg.norm(v) / np.linalg.norm(x) <= 10.0 * rate**m


class TestContractionFactor:
    def test_ring_circulant_half(self):
        wp = build_weight_pair(ring(3), ring(3))
        # circulant eigenvalues 1/2 + 1/2 w^k have modulus 1/2 for w != 1
        assert contraction_factor(wp.A, np.ones((3, 3)) / 3) == pytest.approx(0.5, abs=1e-12)

    def test_single_node_zero(self):
        assert contraction_factor(np.array([[1.0]]), np.array([[1.0]])) == 0.0

    def test_identity_no_contraction(self):
        val = contraction_factor(np.eye(2), np.ones((2, 2)) / 2)
        assert val == pytest.approx(1.0, abs=1e-12)


class TestMetropolis:
    def test_single_node(self):
        np.testing.assert_allclose(underlying_metropolis(DirectedGraph(1)), [[1.0]])

    def test_two_path(self):
        g = DirectedGraph(2, {(1, 2)})
        np.testing.assert_allclose(
            underlying_metropolis(g), [[0.5, 0.5], [0.5, 0.5]]
        )

    def test_ring_doubly_stochastic(self):
        W = underlying_metropolis(ring(3))
        ones = np.ones(3)
        assert np.max(np.abs(W @ ones - ones)) < 1e-12
        assert np.max(np.abs(ones @ W - ones)) < 1e-12
        np.testing.assert_allclose(W, W.T)
        assert np.all(np.diag(W) > 0)

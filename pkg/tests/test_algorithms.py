import numpy as np
import pytest

from dscosim.algorithms import (
    ab_dscsc_init,
    ab_dscsc_step,
    dscgd_init,
    dscgd_step,
    run,
    run_stream,
    scgd_step,
    scsc_step,
    weights_graph,
)
from dscosim.errors import ConfigurationError, DivergenceError
from dscosim.problems import make_quadratic, make_sigmoid_quadratic
from dscosim.schedules import Polynomial, StepSchedule
from dscosim.topology import DirectedGraph, build_weight_pair, generate_ring_plus_random


def ring_weights(n, extra=0, seed=0):
    g = generate_ring_plus_random(n, extra, seed)
    return build_weight_pair(g, g)


def sched(a=0.05, b=0.0, e=0.0, beta=1.0):
    return StepSchedule(Polynomial(a, b, e), beta=beta)


class TestAbStep:
    def test_zero_noise_hand_computed_round(self):
        prob = make_quadratic(3, 2, seed=1, noise_inner=0.0, noise_outer=0.0)
        wp = ring_weights(3)
        rng = run_stream(0)
        x0 = np.random.default_rng(2).normal(size=(3, 2))
        state = ab_dscsc_init(prob, x0, rng)
        # with zero noise: z = Mx, y = exact local gradients
        for i in range(3):
            np.testing.assert_allclose(state.z[i], prob.true_g(i, x0[i]))
        alpha, beta = 0.05, 0.3
        nxt = ab_dscsc_step(state, prob, wp, alpha, beta, rng)
        x_exp = wp.A @ (x0 - alpha * state.y)
        np.testing.assert_allclose(nxt.x, x_exp)
        for i in range(3):
            g_new = prob.true_g(i, x_exp[i])
            g_old = prob.true_g(i, x0[i])
            z_exp = (1 - beta) * (state.z[i] + g_new - g_old) + beta * g_new
            np.testing.assert_allclose(nxt.z[i], z_exp)
        h_exp = np.stack(
            [prob.M[i].T @ (prob.Q[i] @ nxt.z[i] + prob.c[i]) for i in range(3)]
        )
        np.testing.assert_allclose(nxt.y, wp.B @ state.y + h_exp - state.h_prev)

    def test_beta_out_of_range(self):
        prob = make_quadratic(2, 2, seed=0)
        wp = ring_weights(2)
        state = ab_dscsc_init(prob, np.zeros((2, 2)), run_stream(0))
        with pytest.raises(ConfigurationError):
            ab_dscsc_step(state, prob, wp, 0.1, 0.0, run_stream(1))
        with pytest.raises(ConfigurationError):
            ab_dscsc_step(state, prob, wp, 0.1, 1.5, run_stream(1))

    @pytest.mark.parametrize("n,extra", [(3, 0), (5, 3), (10, 5)])
    def test_tracker_conservation(self, n, extra):
        # column stochasticity of B keeps sum_i y_i == sum_i h_i for all k
        prob = make_quadratic(n, 3, seed=2, noise_inner=0.2, noise_outer=0.2)
        wp = ring_weights(n, extra, seed=4)
        rng = run_stream(11)
        state = ab_dscsc_init(prob, np.zeros((n, 3)), rng)
        for k in range(1, 101):
            state = ab_dscsc_step(state, prob, wp, 0.02 / k**0.6, min(1.0, 1.0 / k**0.6), rng)
            lhs = state.y.sum(axis=0)
            rhs = state.h_prev.sum(axis=0)
            denom = max(np.linalg.norm(rhs), 1e-30)
            assert np.linalg.norm(lhs - rhs) / denom < 1e-10


class TestSingleAgentSteps:
    def test_scgd_step_zero_noise(self):
        prob = make_quadratic(1, 2, seed=3, noise_inner=0.0, noise_outer=0.0)
        x = np.array([0.5, -1.0])
        z = np.zeros(2)
        x_new, z_new = scgd_step(x, z, prob, 0.1, 0.4, run_stream(0))
        g = prob.true_g(0, x)
        np.testing.assert_allclose(z_new, 0.6 * z + 0.4 * g)
        grad = prob.M[0].T @ (prob.Q[0] @ z_new + prob.c[0])
        np.testing.assert_allclose(x_new, x - 0.1 * grad)

    def test_scsc_step_correction_term(self):
        prob = make_quadratic(1, 2, seed=3, noise_inner=0.0, noise_outer=0.0)
        x, x_prev = np.array([0.5, -1.0]), np.array([0.2, 0.3])
        z = np.array([1.0, 1.0])
        _, z_new = scsc_step(x, x_prev, z, prob, 0.1, 0.4, run_stream(0))
        g_x, g_prev = prob.true_g(0, x), prob.true_g(0, x_prev)
        np.testing.assert_allclose(z_new, 0.6 * (z + g_x - g_prev) + 0.4 * g_x)


class TestDscgd:
    def test_gamma_beta_constraint(self):
        prob = make_quadratic(3, 2, seed=0)
        wp = ring_weights(3)
        W = np.eye(3)
        state = dscgd_init(prob, np.zeros((3, 2)), run_stream(0), track=False)
        with pytest.raises(ConfigurationError):
            dscgd_step(state, prob, W, 0.01, gamma=3.0, beta_k=0.5, rng=run_stream(1), track=False)

    def test_gt_tracker_conservation_doubly_stochastic(self):
        from dscosim.topology import underlying_metropolis

        prob = make_quadratic(4, 2, seed=1, noise_inner=0.1, noise_outer=0.1)
        g = generate_ring_plus_random(4, 2, 0)
        W = underlying_metropolis(g)
        rng = run_stream(0)
        state = dscgd_init(prob, np.zeros((4, 2)), rng, track=True)
        for _ in range(50):
            state = dscgd_step(state, prob, W, 0.02, gamma=2.0, beta_k=0.3, rng=rng, track=True)
            np.testing.assert_allclose(
                state.y.sum(axis=0), state.g_prev.sum(axis=0), rtol=1e-9, atol=1e-12
            )

    def test_weights_graph_pattern(self):
        wp = ring_weights(3)
        g = weights_graph(wp)
        assert g.edges == frozenset({(1, 2), (2, 3), (3, 1)})


class TestRunDriver:
    def test_bitwise_deterministic_rerun(self):
        prob = make_quadratic(3, 2, seed=5, noise_inner=0.2, noise_outer=0.2)
        wp = ring_weights(3, 1, 2)
        kw = dict(weights=wp, seed=17, metric_stride=10)
        r1 = run("ab-dscsc", prob, sched(0.02, 1.0, 0.6), 200, **kw)
        r2 = run("ab-dscsc", prob, sched(0.02, 1.0, 0.6), 200, **kw)
        assert r1.rows == r2.rows

    def test_seed_changes_trajectory(self):
        prob = make_quadratic(3, 2, seed=5, noise_inner=0.2, noise_outer=0.2)
        wp = ring_weights(3)
        r1 = run("ab-dscsc", prob, sched(0.02, 1.0, 0.6), 50, weights=wp, seed=0)
        r2 = run("ab-dscsc", prob, sched(0.02, 1.0, 0.6), 50, weights=wp, seed=1)
        assert r1.rows != r2.rows

    def test_single_agent_equivalence_short(self):
        # with one agent the networked corrected method IS the single-agent one
        prob = make_quadratic(1, 2, seed=9, noise_inner=0.3, noise_outer=0.3)
        wp = build_weight_pair(DirectedGraph(1), DirectedGraph(1))
        s = sched(0.05, 1.0, 0.6, beta=1.0)
        r_ab = run("ab-dscsc", prob, s, 200, weights=wp, seed=3)
        r_sc = run("scsc", prob, s, 200, seed=3)
        assert r_ab.rows == r_sc.rows  # bitwise

    def test_zero_noise_converges_to_optimum(self):
        prob = make_quadratic(3, 2, seed=5, noise_inner=0.0, noise_outer=0.0)
        wp = ring_weights(3)
        rec = run("ab-dscsc", prob, sched(0.05), 4000, weights=wp, seed=0, metric_stride=500)
        assert rec.rows[-1].opt_gap_avg < 1e-20
        assert rec.rows[-1].consensus_err < 1e-20

    def test_scgd_rejects_multi_agent(self):
        prob = make_quadratic(2, 2, seed=0)
        with pytest.raises(ConfigurationError):
            run("scgd", prob, sched(), 10)

    def test_unknown_algorithm(self):
        prob = make_quadratic(1, 2, seed=0)
        with pytest.raises(ConfigurationError):
            run("sgd", prob, sched(), 10)

    def test_missing_weights(self):
        prob = make_quadratic(2, 2, seed=0)
        with pytest.raises(ConfigurationError):
            run("ab-dscsc", prob, sched(), 10)

    def test_divergence_raises_with_partial_record(self):
        prob = make_quadratic(3, 2, seed=5, noise_inner=0.1, noise_outer=0.1)
        wp = ring_weights(3)
        with pytest.raises(DivergenceError) as exc:
            run("ab-dscsc", prob, sched(a=50.0), 500, weights=wp, seed=0)
        err = exc.value
        assert err.k is not None and err.agent is not None
        assert err.record.status.startswith("diverged@")
        assert len(err.record.rows) >= 1

    def test_metric_stride(self):
        prob = make_quadratic(2, 2, seed=0, noise_inner=0.0, noise_outer=0.0)
        wp = ring_weights(2)
        rec = run("ab-dscsc", prob, sched(0.01), 100, weights=wp, seed=0, metric_stride=25)
        assert [r.k for r in rec.rows] == [1, 26, 51, 76, 101]

    @pytest.mark.parametrize("alg", ["gp-dscgd", "gt-dscgd"])
    def test_dscgd_converges_noisy(self, alg):
        prob = make_quadratic(3, 2, seed=6, noise_inner=0.1, noise_outer=0.1)
        wp = ring_weights(3)
        s = StepSchedule(Polynomial(1.0, 0.0, 0.6), beta=0.25)
        rec = run(alg, prob, s, 3000, weights=wp, seed=0, metric_stride=500, eta=0.05, gamma=2.0)
        assert rec.rows[-1].opt_gap_avg < 0.05

    def test_nonconvex_family_runs_and_descends(self):
        prob = make_sigmoid_quadratic(4, 3, seed=0, noise_inner=0.05, noise_outer=0.05)
        wp = ring_weights(4, 2, 1)
        rec = run("ab-dscsc", prob, sched(0.2, 0.0, 0.5), 2000, weights=wp, seed=0, metric_stride=100)
        assert rec.rows[-1].grad_norm_sq < 0.1 * rec.rows[0].grad_norm_sq

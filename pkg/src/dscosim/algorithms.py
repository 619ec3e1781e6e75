"""Synchronous-round step functions and run drivers.

Implemented methods:

* ``ab-dscsc`` — push-pull gradient tracking with stochastically corrected
  inner-value tracking, over a directed graph pair (A row-stochastic,
  B column-stochastic).
* ``scgd`` / ``scsc`` — single-agent compositional baselines.
* ``gp-dscgd`` / ``gt-dscgd`` — doubly stochastic baselines on the
  symmetrized graph, without/with gradient tracking.

All randomness flows from one counter-based Philox stream per run, consumed
in a fixed order (inner-correction draw, then gradient draw, agents batched),
so a run is bitwise reproducible from (config, seed), and the single-agent
AB recursion consumes draws in exactly the same order as the SCSC driver.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DivergenceError
from .metrics import collect_row
from .records import RunRecord
from .topology import DirectedGraph, underlying_metropolis

DIVERGENCE_LIMIT = 1e6

ALGORITHMS = ("ab-dscsc", "scgd", "scsc", "gp-dscgd", "gt-dscgd")


def run_stream(seed):
    """Counter-based per-run random stream."""
    return np.random.Generator(np.random.Philox(key=np.uint64(seed)))


@dataclass
class NetworkState:
    """Stacked per-agent state of AB-DSCSC at iteration k."""

    k: int
    x: np.ndarray  # (n, d)
    z: object  # (n, p) array, or list of per-agent vectors
    y: np.ndarray  # (n, d) gradient trackers
    h_prev: np.ndarray  # (n, d) last stochastic gradients


def _check_finite(arr, k, what):
    arr = np.atleast_2d(np.asarray(arr))
    bad = ~np.isfinite(arr) | (np.abs(arr) > DIVERGENCE_LIMIT)
    if bad.any():
        agent = int(np.argwhere(bad.any(axis=tuple(range(1, arr.ndim))))[0, 0]) + 1
        raise DivergenceError(
            f"{what} non-finite or beyond {DIVERGENCE_LIMIT:g} at k={k}, agent {agent}",
            k=k,
            agent=agent,
        )


def _corrected_z(z, g_new, g_old, beta):
    if isinstance(z, np.ndarray) and isinstance(g_new, np.ndarray):
        return (1.0 - beta) * (z + g_new - g_old) + beta * g_new
    return [
        (1.0 - beta) * (zi + gn - go) + beta * gn
        for zi, gn, go in zip(z, g_new, g_old)
    ]


def ab_dscsc_init(problem, x0, rng):
    """Initial state: fresh inner sample for z, one gradient draw for y."""
    x0 = np.atleast_2d(np.asarray(x0, dtype=float))
    _check_finite(x0, 1, "initial iterate")
    z, _ = problem.sample_inner_pair_all(x0, x0, rng)
    y = np.asarray(problem.sample_grad_all(x0, z, rng), dtype=float)
    return NetworkState(k=1, x=x0, z=z, y=y, h_prev=y.copy())


def ab_dscsc_step(state, problem, weights, alpha_k, beta_k, rng):
    """One synchronous round: pull-mix x, correct z, push-track y."""
    if not 0.0 < beta_k <= 1.0:
        raise ConfigurationError(f"beta_k must be in (0, 1], got {beta_k}")
    A, B = weights.A, weights.B
    x_new = A @ (state.x - alpha_k * state.y)
    _check_finite(x_new, state.k + 1, "iterate")
    g_new, g_old = problem.sample_inner_pair_all(x_new, state.x, rng)
    z_new = _corrected_z(state.z, g_new, g_old, beta_k)
    h_new = np.asarray(problem.sample_grad_all(x_new, z_new, rng), dtype=float)
    # associate so that the n=1 case (B y == h_prev) reduces to y_new == h_new exactly
    y_new = (B @ state.y - state.h_prev) + h_new
    _check_finite(y_new, state.k + 1, "gradient tracker")
    return NetworkState(k=state.k + 1, x=x_new, z=z_new, y=y_new, h_prev=h_new)


def scgd_step(x, z, problem, alpha_k, beta_k, rng):
    """Single-agent two-timescale baseline: plain inner averaging, then descend."""
    g, _ = problem.sample_inner_pair(0, x, x, rng)
    z_new = (1.0 - beta_k) * z + beta_k * g
    grad = problem.sample_grad(0, x, z_new, rng)
    x_new = x - alpha_k * grad
    _check_finite(x_new, None, "iterate")
    return x_new, z_new


def scsc_step(x, x_prev, z, problem, alpha_k, beta_k, rng):
    """Single-agent stochastically corrected step (value update, then descend)."""
    g_x, g_prev = problem.sample_inner_pair(0, x, x_prev, rng)
    z_new = (1.0 - beta_k) * (z + g_x - g_prev) + beta_k * g_x
    grad = problem.sample_grad(0, x, z_new, rng)
    x_new = x - alpha_k * grad
    _check_finite(x_new, None, "iterate")
    return x_new, z_new


@dataclass
class DsgdState:
    """State of the doubly stochastic baselines (GP/GT)."""

    k: int
    x: np.ndarray
    z: object
    y: np.ndarray | None  # tracker (GT only)
    g_prev: np.ndarray | None  # last stochastic gradients (GT only)


def dscgd_init(problem, x0, rng, track):
    x0 = np.atleast_2d(np.asarray(x0, dtype=float))
    z, _ = problem.sample_inner_pair_all(x0, x0, rng)
    if not track:
        return DsgdState(k=1, x=x0, z=z, y=None, g_prev=None)
    g = np.asarray(problem.sample_grad_all(x0, z, rng), dtype=float)
    return DsgdState(k=1, x=x0, z=z, y=g.copy(), g_prev=g)


def dscgd_step(state, problem, W, eta, gamma, beta_k, rng, track):
    """One GP-DSCGD (track=False) or GT-DSCGD (track=True) round."""
    if gamma * beta_k > 1.0:
        raise ConfigurationError(f"gamma*beta_k = {gamma * beta_k} exceeds 1")
    g_inner, _ = problem.sample_inner_pair_all(state.x, state.x, rng)
    z_new = _corrected_z(state.z, g_inner, g_inner, gamma * beta_k)  # no correction term
    g = np.asarray(problem.sample_grad_all(state.x, z_new, rng), dtype=float)
    if track:
        y_new = W @ state.y + g - state.g_prev
        direction = y_new
    else:
        y_new = None
        direction = g
    x_tilde = W @ state.x - eta * direction
    x_new = state.x + beta_k * (x_tilde - state.x)
    _check_finite(x_new, state.k + 1, "iterate")
    return DsgdState(k=state.k + 1, x=x_new, z=z_new, y=y_new, g_prev=g if track else None)


def _default_x0(problem, rng):
    if hasattr(problem, "init_params"):
        row = problem.init_params(rng)
        return np.tile(row, (problem.n, 1))
    return np.zeros((problem.n, problem.d))


def run(
    algorithm,
    problem,
    schedule,
    K,
    weights=None,
    seed=0,
    metric_stride=1,
    x0=None,
    eta=0.03,
    gamma=3.0,
    config=None,
):
    """Execute K synchronous rounds; returns a RunRecord with metric rows.

    Metrics are recorded at k=1 and then every `metric_stride` rounds.  On
    divergence the partial record is attached to the raised error.
    """
    if algorithm not in ALGORITHMS:
        raise ConfigurationError(f"unknown algorithm {algorithm!r}")
    if K < 1:
        raise ConfigurationError(f"K must be >= 1, got {K}")
    if algorithm in ("scgd", "scsc") and problem.n != 1:
        raise ConfigurationError(f"{algorithm} is single-agent; problem has n={problem.n}")

    rng = run_stream(seed)
    if x0 is None:
        x0 = _default_x0(problem, rng)
    x0 = np.atleast_2d(np.asarray(x0, dtype=float))

    if algorithm == "ab-dscsc":
        if weights is None:
            raise ConfigurationError("ab-dscsc needs a WeightPair")
        u = weights.u
    elif algorithm in ("gp-dscgd", "gt-dscgd"):
        if weights is None:
            raise ConfigurationError(f"{algorithm} needs a WeightPair (for its graph)")
        u = np.ones(problem.n)
    else:
        u = np.ones(1)

    record = RunRecord(config=dict(config or {}), seed=seed)
    start = time.perf_counter()

    def note(k, alpha_k, beta_k, x, z):
        record.rows.append(collect_row(k, alpha_k, beta_k, x, z, problem, u))

    try:
        if algorithm == "ab-dscsc":
            state = ab_dscsc_init(problem, x0, rng)
            note(1, schedule.alpha(1), schedule.beta_of(1), state.x, state.z)
            for k in range(1, K + 1):
                state = ab_dscsc_step(
                    state, problem, weights, schedule.alpha(k), schedule.beta_of(k), rng
                )
                if k % metric_stride == 0:
                    note(state.k, schedule.alpha(k), schedule.beta_of(k), state.x, state.z)
        elif algorithm in ("gp-dscgd", "gt-dscgd"):
            W = underlying_metropolis(weights_graph(weights))
            track = algorithm == "gt-dscgd"
            state = dscgd_init(problem, x0, rng, track)
            note(1, eta, schedule.beta_of(1), state.x, state.z)
            for k in range(1, K + 1):
                state = dscgd_step(
                    state, problem, W, eta, gamma, schedule.beta_of(k), rng, track
                )
                if k % metric_stride == 0:
                    note(state.k, eta, schedule.beta_of(k), state.x, state.z)
        else:
            # Single-agent drivers share the AB draw order: inner-correction
            # draw at the fresh iterate, then the gradient draw.
            x = x0
            z, _ = problem.sample_inner_pair_all(x, x, rng)
            h = np.asarray(problem.sample_grad_all(x, z, rng), dtype=float)
            note(1, schedule.alpha(1), schedule.beta_of(1), x, z)
            for k in range(1, K + 1):
                a_k, b_k = schedule.alpha(k), schedule.beta_of(k)
                x_new = x - a_k * h
                _check_finite(x_new, k + 1, "iterate")
                if algorithm == "scsc":
                    g_new, g_old = problem.sample_inner_pair_all(x_new, x, rng)
                    z = _corrected_z(z, g_new, g_old, b_k)
                else:  # scgd: no correction term
                    g_new, _ = problem.sample_inner_pair_all(x_new, x_new, rng)
                    z = _corrected_z(z, g_new, g_new, b_k)
                h = np.asarray(problem.sample_grad_all(x_new, z, rng), dtype=float)
                x = x_new
                if k % metric_stride == 0:
                    note(k + 1, a_k, b_k, x, z)
    except DivergenceError as err:
        record.status = f"diverged@{err.k}"
        record.wall_seconds = time.perf_counter() - start
        err.record = record
        raise
    record.wall_seconds = time.perf_counter() - start
    return record


def weights_graph(weights):
    """Directed graph implied by the nonzero off-diagonal pattern of A."""
    A = weights.A
    n = A.shape[0]
    edges = {
        (j + 1, i + 1) for i in range(n) for j in range(n) if i != j and A[i, j] > 0
    }
    return DirectedGraph(n, frozenset(edges))

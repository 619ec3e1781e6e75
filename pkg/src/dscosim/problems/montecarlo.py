"""Monte Carlo validation oracle for the stochastic gradient's unbiasedness."""

from __future__ import annotations

import numpy as np

from ..errors import ConfigurationError

INNER_PROXY_DRAWS = 1000


def monte_carlo_grad_h(problem, x, draws, rng, inner_draws=INNER_PROXY_DRAWS):
    """Estimate grad h(x) by averaging the per-agent stochastic gradients.

    Each of the `draws` outer samples evaluates (1/n) sum_i of
    sample_grad(i, x, z_i) where z_i is the agent's inner value at x: the
    closed form when the oracle has one, otherwise the mean of
    `inner_draws` fresh inner samples per outer draw.

    Returns (mean, stderr) per coordinate.
    """
    if draws < 1:
        raise ConfigurationError(f"draws must be >= 1, got {draws}")
    n, d = problem.n, problem.d

    def inner_value(i):
        if problem.has_true_g:
            return problem.true_g(i, x)
        acc = None
        for _ in range(inner_draws):
            g, _ = problem.sample_inner_pair(i, x, x, rng)
            acc = g if acc is None else acc + g
        return acc / inner_draws

    samples = np.empty((draws, d))
    for t in range(draws):
        total = np.zeros(d)
        for i in range(n):
            total += problem.sample_grad(i, x, inner_value(i), rng)
        samples[t] = total / n
    mean = samples.mean(axis=0)
    if draws == 1:
        return mean, np.zeros(d)
    stderr = samples.std(axis=0, ddof=1) / np.sqrt(draws)
    return mean, stderr

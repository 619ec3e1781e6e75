"""Per-iteration diagnostics and rate/bound checks."""

from __future__ import annotations

import numpy as np

from .errors import CapabilityError, InsufficientDataError
from .records import MetricRow


def weighted_average(x, u):
    """Network average (1/n) sum_i u_i x_i with the left Perron weights."""
    x = np.atleast_2d(x)
    return (u @ x) / len(u)


def consensus_error(x, u):
    """sum_i ||x_i - xbar||^2 with xbar the u-weighted average."""
    x = np.atleast_2d(x)
    xbar = weighted_average(x, u)
    return float(np.sum((x - xbar) ** 2))


def tracking_error(z, x, problem):
    """sum_i ||z_i - g_i(x_i)||^2; needs a closed-form inner value."""
    if not problem.has_true_g:
        raise CapabilityError("tracking error needs true_g")
    x = np.atleast_2d(x)
    total = 0.0
    for i in range(problem.n):
        total += float(np.sum((np.asarray(z[i]) - problem.true_g(i, x[i])) ** 2))
    return total


def collect_row(k, alpha_k, beta_k, x, z, problem, u):
    """MetricRow for the current state; missing capabilities give None cells."""
    x = np.atleast_2d(x)
    row = {
        "k": k,
        "alpha_k": alpha_k,
        "beta_k": beta_k,
        "consensus_err": consensus_error(x, u),
    }
    if problem.has_true_g:
        row["tracking_err"] = tracking_error(z, x, problem)
    if problem.has_true_grad:
        xbar = weighted_average(x, u)
        row["grad_norm_sq"] = float(np.sum(problem.true_grad_h(xbar) ** 2))
    if problem.has_optimum:
        xstar = problem.optimum()
        row["opt_gap_avg"] = float(np.mean(np.sum((x - xstar) ** 2, axis=1)))
        hstar = problem.true_h(xstar)
        row["residual_avg"] = float(
            np.mean([problem.true_h(xi) for xi in x]) - hstar
        )
    return MetricRow(**row)


def fit_rate_slope(record, column, k_range):
    """OLS of log(value) on log(k) over k in [k_range[0], k_range[1]].

    Returns (slope, intercept, r2).
    """
    ks, vals = record.column(column)
    lo, hi = k_range
    pts = [(k, v) for k, v in zip(ks, vals) if lo <= k <= hi]
    if len(pts) < 10:
        raise InsufficientDataError(f"only {len(pts)} points in k range {k_range}")
    if any(v <= 0 for _, v in pts):
        raise InsufficientDataError(f"column {column} not strictly positive in range")
    lk = np.log([k for k, _ in pts])
    lv = np.log([v for _, v in pts])
    slope, intercept = np.polyfit(lk, lv, 1)
    pred = slope * lk + intercept
    ss_res = float(np.sum((lv - pred) ** 2))
    ss_tot = float(np.sum((lv - lv.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), r2


def geometric_sum_check(rho, alphas):
    """max over k of (sum_{t<=k} rho^{k-t} alpha_t) / alpha_k.

    A finite, K-stable value certifies the geometric-weighted-sum bound
    numerically.  `alphas` is the sequence alpha_1..alpha_K.
    """
    if not 0 <= rho < 1:
        raise ValueError(f"rho must be in [0, 1), got {rho}")
    worst = 0.0
    acc = 0.0
    for a in alphas:
        acc = rho * acc + a
        worst = max(worst, acc / a)
    return worst


def bounded_ratio_check(record, column, scale, k_final, k_median_range, factor=10.0):
    """True iff column/scale at k_final is <= factor x its median over the range.

    `scale` maps k to the normalizer (e.g. alpha_k**2 or beta_k).
    """
    ks, vals = record.column(column)
    ratios = {k: v / scale(k) for k, v in zip(ks, vals)}
    lo, hi = k_median_range
    window = [r for k, r in ratios.items() if lo <= k <= hi]
    if not window or k_final not in ratios:
        raise InsufficientDataError("required iterations missing from record")
    return ratios[k_final] <= factor * float(np.median(window)), ratios[k_final], float(np.median(window))

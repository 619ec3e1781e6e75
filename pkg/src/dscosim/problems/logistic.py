"""Distributed logistic regression with a noisy linear inner map.

Per agent i with m local samples (a_j, b_j):
    inner component j:  G_i(x; phi)_j = -b_j (phi + a_j)^T x
    outer:              f_i(z) = (1/m) sum_j log(1 + exp(z_j))   (deterministic)

The default draws phi ~ N(0, I_d) fresh each call (population objective, so
the mean inner map and the optimum have closed forms).  With
``fixed_inner_pool=l`` the instance instead samples phi uniformly from l
pre-drawn vectors, reproducing a finite-pool objective; closed forms then
use the pool mean.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from ..errors import ConfigurationError
from .base import ProblemOracle


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


@dataclass(frozen=True)
class LogisticProblem(ProblemOracle):
    a: np.ndarray  # (n, m, d) features
    b: np.ndarray  # (n, m) labels in {-1, +1}
    pool: np.ndarray | None = None  # (l, d) fixed inner samples, or None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    has_true_g = True
    has_true_grad = True
    has_optimum = True

    @property
    def n(self):
        return self.a.shape[0]

    @property
    def m(self):
        return self.a.shape[1]

    @property
    def d(self):
        return self.a.shape[2]

    def inner_dim(self, i):
        return self.m

    @property
    def phi_mean(self):
        return self.pool.mean(axis=0) if self.pool is not None else np.zeros(self.d)

    # -- sampling -----------------------------------------------------------

    def _draw_phi(self, rng, size=None):
        if self.pool is not None:
            idx = rng.integers(0, self.pool.shape[0], size=size)
            return self.pool[idx]
        shape = (self.d,) if size is None else (size, self.d)
        return rng.normal(size=shape)

    def _inner(self, i, x, phi):
        return -self.b[i] * ((self.a[i] + phi) @ x)

    def sample_inner_pair(self, i, x_new, x_old, rng):
        phi = self._draw_phi(rng)
        return self._inner(i, x_new, phi), self._inner(i, x_old, phi)

    def sample_grad(self, i, x, z, rng):
        phi = self._draw_phi(rng)
        w = _sigmoid(z) / self.m  # outer gradient, deterministic
        cols = -self.b[i][:, None] * (self.a[i] + phi)  # (m, d)
        return cols.T @ w

    def sample_inner_pair_all(self, X_new, X_old, rng):
        phi = self._draw_phi(rng, size=self.n)  # (n, d)
        shifted = self.a + phi[:, None, :]
        new = -self.b * np.einsum("nmd,nd->nm", shifted, X_new)
        old = -self.b * np.einsum("nmd,nd->nm", shifted, X_old)
        return new, old

    def sample_grad_all(self, X, Z, rng):
        phi = self._draw_phi(rng, size=self.n)
        w = _sigmoid(np.asarray(Z)) / self.m
        shifted = self.a + phi[:, None, :]
        return -np.einsum("nm,nmd,nm->nd", self.b, shifted, w)

    # -- closed forms (mean inner map) --------------------------------------

    def true_g(self, i, x):
        return self._inner(i, x, self.phi_mean)

    def _mean_jacobians(self):
        # grad g_i as columns: (n, m, d) with row j = -b_j (phi_mean + a_j)
        if "J" not in self._cache:
            self._cache["J"] = -self.b[:, :, None] * (self.a + self.phi_mean)
        return self._cache["J"]

    def true_grad_h(self, x):
        J = self._mean_jacobians()
        g = np.einsum("nmd,d->nm", J, x)
        w = _sigmoid(g) / self.m
        return np.einsum("nmd,nm->d", J, w) / self.n

    def true_h(self, x):
        J = self._mean_jacobians()
        g = np.einsum("nmd,d->nm", J, x)
        return float(np.logaddexp(0.0, g).mean())

    def optimum(self, tol=1e-12):
        """Minimizer of the deterministic mean objective (centralized solve)."""
        if "xstar" not in self._cache:
            res = minimize(
                self.true_h,
                np.zeros(self.d),
                jac=self.true_grad_h,
                method="L-BFGS-B",
                options={"gtol": tol, "ftol": 0.0, "maxiter": 50_000},
            )
            self._cache["xstar"] = res.x
        return self._cache["xstar"]

    def data_csv(self):
        """One row per sample: agent, label, features."""
        lines = ["agent,label," + ",".join(f"x{t}" for t in range(self.d))]
        for i in range(self.n):
            for j in range(self.m):
                feats = ",".join(repr(float(v)) for v in self.a[i, j])
                lines.append(f"{i + 1},{int(self.b[i, j])},{feats}")
        return "\n".join(lines) + "\n"


def make_logistic_cso(
    n, samples_per_agent, d, seed, fixed_inner_pool=0,
    feature_scale=1.0, label_noise=0.1,
):
    """Random instance; labels come from a hidden linear separator plus noise.

    `feature_scale` multiplies the Gaussian features; `label_noise` is the
    margin-noise level relative to the feature scale, so the label flip rate
    is scale-invariant.  Larger noise keeps the data far from separable and
    the optimum at a moderate norm.
    """
    if min(n, samples_per_agent, d) < 1:
        raise ConfigurationError("n, samples_per_agent and d must be >= 1")
    if feature_scale <= 0 or label_noise < 0:
        raise ConfigurationError("need feature_scale > 0 and label_noise >= 0")
    rng = np.random.default_rng(seed)
    a = rng.normal(scale=feature_scale, size=(n, samples_per_agent, d))
    w_hidden = rng.normal(size=d)
    margins = a @ w_hidden + rng.normal(
        scale=label_noise * feature_scale, size=(n, samples_per_agent)
    )
    b = np.where(margins >= 0, 1.0, -1.0)
    pool = rng.normal(size=(fixed_inner_pool, d)) if fixed_inner_pool else None
    return LogisticProblem(a=a, b=b, pool=pool)

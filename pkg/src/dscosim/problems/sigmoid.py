"""Nonconvex synthetic family: quadratic outer loss over a saturating inner map.

Per agent i:  G_i(x; phi) = tanh(W_i x) + phi,  phi ~ N(0, sigma_phi^2 I_p)
              F_i(z; zeta) = 1/2 ||z - t_i||^2 + zeta^T z,  zeta ~ N(0, sigma_zeta^2 I_p)
The inner Jacobian is deterministic and bounded, the composition is smooth
and nonconvex, and the exact gradient of the global objective is available,
which makes this family the workhorse for stationarity-rate experiments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError
from .base import ProblemOracle


@dataclass(frozen=True)
class SigmoidQuadraticProblem(ProblemOracle):
    W: np.ndarray  # (n, p, d)
    t: np.ndarray  # (n, p) outer targets
    sigma_phi: float
    sigma_zeta: float

    has_true_g = True
    has_true_grad = True

    @property
    def n(self):
        return self.W.shape[0]

    @property
    def p(self):
        return self.W.shape[1]

    @property
    def d(self):
        return self.W.shape[2]

    def inner_dim(self, i):
        return self.p

    def sample_inner_pair(self, i, x_new, x_old, rng):
        phi = rng.normal(size=self.p) * self.sigma_phi
        return np.tanh(self.W[i] @ x_new) + phi, np.tanh(self.W[i] @ x_old) + phi

    def sample_grad(self, i, x, z, rng):
        zeta = rng.normal(size=self.p) * self.sigma_zeta
        s = np.tanh(self.W[i] @ x)
        jac_t = self.W[i].T * (1.0 - s**2)  # (d, p)
        return jac_t @ (z - self.t[i] + zeta)

    def sample_inner_pair_all(self, X_new, X_old, rng):
        phi = rng.normal(size=(self.n, self.p)) * self.sigma_phi
        new = np.tanh(np.einsum("npd,nd->np", self.W, X_new)) + phi
        old = np.tanh(np.einsum("npd,nd->np", self.W, X_old)) + phi
        return new, old

    def sample_grad_all(self, X, Z, rng):
        zeta = rng.normal(size=(self.n, self.p)) * self.sigma_zeta
        s = np.tanh(np.einsum("npd,nd->np", self.W, X))
        resid = np.asarray(Z) - self.t + zeta
        return np.einsum("npd,np,np->nd", self.W, 1.0 - s**2, resid)

    def true_g(self, i, x):
        return np.tanh(self.W[i] @ x)

    def true_grad_h(self, x):
        s = np.tanh(np.einsum("npd,d->np", self.W, x))
        return np.einsum("npd,np,np->d", self.W, 1.0 - s**2, s - self.t) / self.n

    def true_h(self, x):
        s = np.tanh(np.einsum("npd,d->np", self.W, x))
        return float(0.5 * np.sum((s - self.t) ** 2) / self.n)


def make_sigmoid_quadratic(n, d, seed, p=None, noise_inner=0.1, noise_outer=0.1):
    if noise_inner < 0 or noise_outer < 0:
        raise ConfigurationError("noise levels must be nonnegative")
    p = d if p is None else p
    rng = np.random.default_rng(seed)
    W = rng.normal(size=(n, p, d)) / np.sqrt(d)
    t = rng.uniform(-0.8, 0.8, size=(n, p))
    return SigmoidQuadraticProblem(W=W, t=t, sigma_phi=float(noise_inner), sigma_zeta=float(noise_outer))

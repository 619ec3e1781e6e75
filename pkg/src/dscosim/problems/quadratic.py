"""Strongly convex quadratic compositional family with full closed forms.

Per agent i:  G_i(x; phi) = M_i x + phi,   phi ~ N(0, sigma_phi^2 I_d),
              F_i(z; zeta) = 1/2 z^T Q_i z + zeta^T z,  zeta ~ N(c_i, sigma_zeta^2 I_d),
with Q_i symmetric positive definite.  Everything the convergence and
normality experiments need (optimum, Hessian, noise covariances) is exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError
from .base import NormalityData, ProblemOracle


@dataclass(frozen=True)
class QuadraticProblem(ProblemOracle):
    M: np.ndarray  # (n, d, d) inner maps
    Q: np.ndarray  # (n, d, d) symmetric PD outer curvatures
    c: np.ndarray  # (n, d) outer noise means
    sigma_phi: float
    sigma_zeta: float
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    has_true_g = True
    has_true_grad = True
    has_optimum = True
    has_normality_data = True

    @property
    def n(self):
        return self.M.shape[0]

    @property
    def d(self):
        return self.M.shape[2]

    def inner_dim(self, i):
        return self.d

    # -- sampling -----------------------------------------------------------

    def sample_inner_pair(self, i, x_new, x_old, rng):
        phi = rng.normal(size=self.d) * self.sigma_phi
        return self.M[i] @ x_new + phi, self.M[i] @ x_old + phi

    def sample_grad(self, i, x, z, rng):
        zeta = self.c[i] + rng.normal(size=self.d) * self.sigma_zeta
        return self.M[i].T @ (self.Q[i] @ z + zeta)

    def sample_inner_pair_all(self, X_new, X_old, rng):
        phi = rng.normal(size=(self.n, self.d)) * self.sigma_phi
        base_new = np.einsum("nij,nj->ni", self.M, X_new)
        base_old = np.einsum("nij,nj->ni", self.M, X_old)
        return base_new + phi, base_old + phi

    def sample_grad_all(self, X, Z, rng):
        zeta = self.c + rng.normal(size=(self.n, self.d)) * self.sigma_zeta
        inner = np.einsum("nij,nj->ni", self.Q, np.asarray(Z)) + zeta
        return np.einsum("nji,nj->ni", self.M, inner)

    # -- closed forms -------------------------------------------------------

    def true_g(self, i, x):
        return self.M[i] @ x

    def true_inner_jacobian_t(self, i, x):
        return self.M[i].T

    def _hess_and_shift(self):
        if "H" not in self._cache:
            H = np.einsum("nji,njk,nkl->il", self.M, self.Q, self.M)
            r = np.einsum("nji,nj->i", self.M, self.c)
            self._cache["H"] = H
            self._cache["r"] = r
        return self._cache["H"], self._cache["r"]

    def true_grad_h(self, x):
        H, r = self._hess_and_shift()
        return (H @ x + r) / self.n

    def true_h(self, x):
        g = np.einsum("nij,j->ni", self.M, x)
        vals = 0.5 * np.einsum("ni,nij,nj->n", g, self.Q, g) + np.einsum(
            "ni,ni->n", self.c, g
        )
        return float(vals.mean())

    def optimum(self):
        H, r = self._hess_and_shift()
        return np.linalg.solve(H, -r)

    @property
    def strong_convexity(self):
        """Modulus mu of h: smallest eigenvalue of H / n."""
        H, _ = self._hess_and_shift()
        return float(np.linalg.eigvalsh(H).min() / self.n)

    def normality_data(self):
        H, _ = self._hess_and_shift()
        S1 = self.sigma_zeta**2 * np.einsum("nji,njk->ik", self.M, self.M)
        S2 = self.sigma_phi**2 * np.einsum("nji,njk,nkl,nlm->im", self.M, self.Q, self.Q, self.M)
        return NormalityData(H=H, T=[self.Q[i] for i in range(self.n)], S1=S1, S2=S2)


def make_quadratic(n, d, seed, noise_inner=0.1, noise_outer=0.1, conditioning=10.0):
    """Random instance with Q_i condition number <= `conditioning`."""
    if noise_inner < 0 or noise_outer < 0:
        raise ConfigurationError("noise levels must be nonnegative")
    if conditioning < 1:
        raise ConfigurationError(f"conditioning must be >= 1, got {conditioning}")
    rng = np.random.default_rng(seed)
    M = np.empty((n, d, d))
    Q = np.empty((n, d, d))
    c = rng.normal(size=(n, d))
    for i in range(n):
        u_m, _ = np.linalg.qr(rng.normal(size=(d, d)))
        v_m, _ = np.linalg.qr(rng.normal(size=(d, d)))
        M[i] = u_m @ np.diag(rng.uniform(0.6, 1.4, size=d)) @ v_m.T
        u_q, _ = np.linalg.qr(rng.normal(size=(d, d)))
        lam = np.linspace(1.0, conditioning, d)
        Q[i] = u_q @ np.diag(lam) @ u_q.T
        Q[i] = 0.5 * (Q[i] + Q[i].T)
    return QuadraticProblem(M=M, Q=Q, c=c, sigma_phi=float(noise_inner), sigma_zeta=float(noise_outer))

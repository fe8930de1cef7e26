"""Conjugate Bayesian linear regression with unit noise variance.

Weights have a Normal(0, c I) prior and responses are Normal(theta' x, 1),
so the posterior is Gaussian with precision (1/c) I + X'X in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular

from ..data import Dataset, LatentState
from ..engine import Model

__all__ = [
    "BLRPosterior",
    "BLRModel",
    "blr_posterior",
    "blr_predictive_sample",
    "simulate_regression_data",
]


@dataclass(frozen=True)
class BLRPosterior:
    """Gaussian posterior over regression weights."""

    mean: np.ndarray
    precision: np.ndarray
    prior_variance: float
    noise_variance: float = 1.0

    def covariance(self) -> np.ndarray:
        return cho_solve(cho_factor(self.precision, lower=True), np.eye(len(self.mean)))

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        """One weight draw via the precision's Cholesky factor."""
        lower = np.linalg.cholesky(self.precision)
        z = rng.standard_normal(len(self.mean))
        return self.mean + solve_triangular(lower.T, z, lower=False)


def blr_posterior(X: np.ndarray, y: np.ndarray, c: float) -> BLRPosterior:
    """Closed-form conjugate update; N = 0 rows returns the prior."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if c <= 0:
        raise ValueError("prior variance must be positive")
    if X.ndim != 2 or len(X) != len(y):
        raise ValueError("X must be (N, p) with y of length N")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ValueError("non-finite entries in X or y")
    p = X.shape[1]
    precision = np.eye(p) / c + X.T @ X
    mean = cho_solve(cho_factor(precision, lower=True), X.T @ y)
    return BLRPosterior(mean=mean, precision=precision, prior_variance=c)


def blr_predictive_sample(theta: np.ndarray, X: np.ndarray, rng: np.random.Generator,
                          noise_sd: float = 1.0) -> Dataset:
    """Responses theta' x_i + N(0, noise_sd^2) at the given covariates."""
    theta = np.asarray(theta, dtype=float)
    X = np.asarray(X, dtype=float)
    if X.shape[1] != len(theta):
        raise ValueError("covariate dimension does not match weights")
    y = X @ theta + noise_sd * rng.standard_normal(len(X))
    return Dataset.from_regression(X, y)


def simulate_regression_data(n: int = 50, p: int = 100, seed: int = 0,
                             rng: np.random.Generator | None = None):
    """Simulated design: x ~ Uniform(0,1), weights t_3 * Uniform elementwise.

    Returns ``(X, y, theta_true)`` with unit-variance response noise.
    """
    if rng is None:
        rng = np.random.default_rng(seed)
    X = rng.random((n, p))
    theta_true = rng.standard_t(3, p) * rng.random(p)
    y = X @ theta_true + rng.standard_normal(n)
    return X, y, theta_true


class BLRModel(Model):
    """Check-engine adapter drawing fresh Uniform(0,1) covariates.

    The simulation treats covariates as part of the data-generating process,
    so predictive draws pair fresh covariate rows with responses from the
    sampled weights.
    """

    name = "blr"

    def __init__(self, c: float, p: int, noise_sd: float = 1.0):
        if c <= 0:
            raise ValueError("prior variance must be positive")
        self.c = float(c)
        self.p = int(p)
        self.noise_sd = float(noise_sd)

    def posterior_sample(self, y_obs: Dataset, rng: np.random.Generator) -> LatentState:
        post = blr_posterior(y_obs.X, y_obs.y, self.c)
        return LatentState(global_latent=post.sample(rng))

    def prior_sample(self, rng: np.random.Generator) -> LatentState:
        theta = np.sqrt(self.c) * rng.standard_normal(self.p)
        return LatentState(global_latent=theta)

    def predictive_sample(self, state: LatentState, size: int, rng: np.random.Generator) -> Dataset:
        X = rng.random((size, self.p))
        return blr_predictive_sample(state.global_latent, X, rng, noise_sd=self.noise_sd)

"""Dirichlet-process predictive model for scalar data.

The random measure is never represented explicitly; conditioning on ``n``
observed atoms gives the predictive mixture ``alpha/(alpha+n) H + sum_i
1/(alpha+n) delta_{y_i}``.  For density evaluation the atoms are smoothed
with a Gaussian kernel so the log-predictive discrepancy stays finite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..data import Dataset, LatentState
from ..engine import Model

__all__ = [
    "Normal",
    "DPPredictive",
    "DPModel",
    "dp_predictive_sample",
    "dp_predictive_logdensity",
    "default_bandwidth",
]


@dataclass(frozen=True)
class Normal:
    """Minimal Gaussian with the frozen-scipy calling convention.

    Fast enough for tight Monte Carlo loops; scipy frozen distributions work
    as drop-in replacements wherever a base measure is expected.
    """

    mean: float
    sd: float

    def rvs(self, size: int, random_state: np.random.Generator) -> np.ndarray:
        return self.mean + self.sd * random_state.standard_normal(size)

    def logpdf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return -0.5 * np.log(2 * np.pi * self.sd**2) - (x - self.mean) ** 2 / (2 * self.sd**2)


def default_bandwidth(atoms: np.ndarray) -> float:
    """Scott-type rule scaled down by half: 0.5 * sd * n^(-1/5)."""
    n = len(atoms)
    if n < 2:
        return 1.0
    sd = float(np.std(atoms, ddof=1))
    if sd == 0.0:
        return 1.0
    return 0.5 * sd * n ** (-0.2)


@dataclass(frozen=True)
class DPPredictive:
    """Predictive distribution of a DP model conditioned on observed atoms.

    ``base`` is a frozen scipy distribution (or anything exposing ``rvs`` and
    ``logpdf``).  ``kernel_bandwidth`` smooths the atom point masses for
    density evaluation only; sampling reproduces atoms exactly.
    """

    alpha: float
    base: object
    atoms: np.ndarray
    kernel_bandwidth: float

    def __post_init__(self) -> None:
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")
        if self.alpha == 0 and len(self.atoms) == 0:
            raise ValueError("alpha = 0 with no atoms leaves no mixture mass")
        if self.kernel_bandwidth <= 0:
            raise ValueError("kernel bandwidth must be positive")
        bw = self.kernel_bandwidth
        n = len(self.atoms)
        object.__setattr__(self, "_log_kernel_const",
                           -0.5 * np.log(2 * np.pi * bw * bw) - np.log(self.alpha + n))
        object.__setattr__(self, "_inv_two_bw2", 1.0 / (2 * bw * bw))

    @property
    def base_weight(self) -> float:
        return self.alpha / (self.alpha + len(self.atoms))

    def sample(self, size: int, rng: np.random.Generator) -> np.ndarray:
        take_base = rng.random(size) < self.base_weight
        base_draws = np.asarray(self.base.rvs(size=size, random_state=rng), dtype=float)
        if len(self.atoms):
            atom_draws = self.atoms[rng.integers(0, len(self.atoms), size=size)]
        else:
            atom_draws = np.zeros(size)
        return np.where(take_base, base_draws, atom_draws)

    def log_density(self, points) -> np.ndarray:
        """Log of the smoothed mixture density at each point."""
        points = np.atleast_1d(np.asarray(points, dtype=float))
        n = len(self.atoms)
        m = len(points)
        has_base = self.alpha > 0
        comps = np.empty((m, n + (1 if has_base else 0)))
        if has_base:
            comps[:, 0] = self.base.logpdf(points) + np.log(self.base_weight)
        if n:
            diff = points[:, None] - self.atoms[None, :]
            np.multiply(diff, diff, out=diff)
            diff *= -self._inv_two_bw2
            diff += self._log_kernel_const
            comps[:, 1 if has_base else 0:] = diff
        top = comps.max(axis=1)
        comps -= top[:, None]
        np.exp(comps, out=comps)
        return top + np.log(comps.sum(axis=1))


def dp_predictive_sample(dp: DPPredictive, size: int, rng: np.random.Generator) -> Dataset:
    """Draw ``size`` points: base measure w.p. alpha/(alpha+n), else an atom."""
    if size < 1:
        raise ValueError("size must be >= 1")
    return Dataset.from_scalars(dp.sample(size, rng))


def dp_predictive_logdensity(dp: DPPredictive, point) -> float | np.ndarray:
    """Smoothed predictive log density at ``point`` (scalar or array)."""
    out = dp.log_density(point)
    return float(out[0]) if np.isscalar(point) else out


class DPModel(Model):
    """DP model over scalars: check-engine adapter.

    The posterior over the random measure is collapsed into the predictive
    state, so ``posterior_sample`` is deterministic given the conditioning
    data.  ``bandwidth=None`` applies the default rule to the conditioning
    atoms; the prior state has no atoms (predictive = base measure).
    """

    name = "dp"

    def __init__(self, alpha: float, base=None, bandwidth: float | None = None,
                 base_mean: float = 5.0, base_variance: float = 2.0):
        self.alpha = float(alpha)
        self.base = base if base is not None else Normal(base_mean, np.sqrt(base_variance))
        self.bandwidth = bandwidth
        self._memo = None  # conditioning data -> state; deterministic either way

    def _state(self, atoms: np.ndarray) -> LatentState:
        bw = self.bandwidth if self.bandwidth is not None else default_bandwidth(atoms)
        dp = DPPredictive(alpha=self.alpha, base=self.base, atoms=atoms, kernel_bandwidth=bw)
        return LatentState(global_latent=dp)

    def posterior_sample(self, y_obs: Dataset, rng: np.random.Generator) -> LatentState:
        memo = self._memo
        if memo is not None and memo[0] is y_obs:
            return memo[1]
        state = self._state(np.asarray(y_obs.values, dtype=float))
        self._memo = (y_obs, state)
        return state

    def prior_sample(self, rng: np.random.Generator) -> LatentState:
        return self._state(np.empty(0))

    def predictive_sample(self, state: LatentState, size: int, rng: np.random.Generator) -> Dataset:
        return dp_predictive_sample(state.global_latent, size, rng)

    def log_predictive_density(self, points: Dataset, state: LatentState) -> np.ndarray:
        return state.global_latent.log_density(points.values)

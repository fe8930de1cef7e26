"""Toy models and independent oracles shared across the test modules."""

import itertools
import math

import numpy as np

from popcheck import Dataset, LatentState, GroupedModel, Model


class FixedNormalModel(Model):
    """Null model: the predictive is a fixed Normal, untouched by data.

    Prior and posterior coincide (there is nothing to learn), which makes it
    the reference model for null-calibration checks.
    """

    name = "fixed_normal"

    def __init__(self, mean=0.0, sd=1.0):
        self.mean = mean
        self.sd = sd

    def posterior_sample(self, y_obs, rng):
        return LatentState(global_latent=(self.mean, self.sd))

    def prior_sample(self, rng):
        return LatentState(global_latent=(self.mean, self.sd))

    def predictive_sample(self, state, size, rng):
        mean, sd = state.global_latent
        return Dataset.from_scalars(mean + sd * rng.standard_normal(size))


class TwoPointBernoulliModel(Model):
    """Bernoulli likelihood with a two-atom prior on the success probability.

    Small enough that posteriors and predictive distributions enumerate
    exactly, which gives the brute-force oracle for the check estimators.
    """

    name = "two_point_bernoulli"

    def __init__(self, theta_a=0.2, theta_b=0.7, prior_a=0.5):
        self.thetas = np.array([theta_a, theta_b])
        self.prior = np.array([prior_a, 1.0 - prior_a])

    def posterior_probs(self, y_obs):
        counts = y_obs.values.sum()
        n = len(y_obs)
        lik = self.thetas**counts * (1.0 - self.thetas) ** (n - counts)
        post = self.prior * lik
        return post / post.sum()

    def posterior_sample(self, y_obs, rng):
        probs = self.posterior_probs(y_obs)
        pick = int(rng.random() < probs[1])
        return LatentState(global_latent=self.thetas[pick])

    def prior_sample(self, rng):
        pick = int(rng.random() < self.prior[1])
        return LatentState(global_latent=self.thetas[pick])

    def predictive_sample(self, state, size, rng):
        theta = state.global_latent
        return Dataset.from_scalars((rng.random(size) < theta).astype(float))


def enumerate_ppc_expectation(model, y_obs, rep_size, d_fn, g_fn):
    """Exact E[g(d(y_rep), d(y_obs))] for the two-point Bernoulli model."""
    post = model.posterior_probs(y_obs)
    d_obs = d_fn(y_obs.values)
    total = 0.0
    for theta, w in zip(model.thetas, post):
        for outcome in itertools.product((0.0, 1.0), repeat=rep_size):
            arr = np.array(outcome)
            ones = arr.sum()
            p = theta**ones * (1.0 - theta) ** (rep_size - ones)
            total += w * p * g_fn(d_fn(arr), d_obs)
    return total


class BinaryLocalHierarchyModel(GroupedModel):
    """Two-level toy: per-group binary local, Gaussian data given the local.

    z_j ~ Bernoulli(q) (prior), y | z ~ Normal(mu_z, 1).  The local posterior
    given a group's data is an exact two-point distribution, so per-group
    checks enumerate in closed form.
    """

    name = "binary_local_hierarchy"

    def __init__(self, mu0=0.0, mu1=3.0, q=0.5):
        self.mu = np.array([mu0, mu1])
        self.q = q

    def posterior_sample(self, y_obs, rng):
        return LatentState(global_latent=self.mu)

    def local_prior_sample(self, state, group, rng):
        return int(rng.random() < self.q)

    def local_posterior_probs(self, y_obs_j):
        v = y_obs_j.values
        loglik = np.array([
            -0.5 * np.sum((v - self.mu[0]) ** 2),
            -0.5 * np.sum((v - self.mu[1]) ** 2),
        ])
        post = np.array([1.0 - self.q, self.q]) * np.exp(loglik - loglik.max())
        return post / post.sum()

    def local_posterior_sample(self, y_obs_j, state, group, rng):
        probs = self.local_posterior_probs(y_obs_j)
        return int(rng.random() < probs[1])

    def local_predictive_sample(self, state, local, group, size, rng):
        return Dataset.from_scalars(self.mu[local] + rng.standard_normal(size))


def entropy_from_counts(counts):
    """Plain-python Shannon entropy (natural log) of a count table."""
    total = sum(counts)
    h = 0.0
    for c in counts:
        if c > 0:
            p = c / total
            h -= p * math.log(p)
    return h


def brute_force_imi(doc_ids, word_ids, assignments, K, V):
    """Dictionary-based IMI oracle, independent of the library path."""
    D = max(doc_ids) + 1 if len(doc_ids) else 0
    values = np.full((K, V), np.nan)
    h_k = np.full(K, np.nan)
    for k in range(K):
        docs_k = [d for d, t in zip(doc_ids, assignments) if t == k]
        if not docs_k:
            continue
        counts_k = [docs_k.count(d) for d in range(D)]
        h_k[k] = entropy_from_counts(counts_k)
        for w in set(w for w, t in zip(word_ids, assignments) if t == k):
            docs_kw = [
                d for d, w2, t in zip(doc_ids, word_ids, assignments)
                if t == k and w2 == w
            ]
            counts_kw = [docs_kw.count(d) for d in range(D)]
            values[k, w] = h_k[k] - entropy_from_counts(counts_kw)
    return values, h_k


def grid_posterior_density(x_grid, xvals, yvals, c):
    """Quadrature oracle for the 1-d regression posterior density.

    Normalizes prior x likelihood on a grid with the trapezoid rule.
    """
    log_prior = -0.5 * x_grid**2 / c
    log_lik = np.zeros_like(x_grid)
    for xi, yi in zip(xvals, yvals):
        log_lik += -0.5 * (yi - x_grid * xi) ** 2
    log_post = log_prior + log_lik
    log_post -= log_post.max()
    dens = np.exp(log_post)
    dens /= np.trapezoid(dens, x_grid)
    return dens


def enumerate_local_assignments(words, topics, alpha):
    """Exact assignment distribution for a short document, topics fixed.

    Enumerates every topic configuration; the prior over configurations is
    Dirichlet-multinomial with parameter alpha.
    """
    K = topics.shape[0]
    n = len(words)
    configs = list(itertools.product(range(K), repeat=n))
    weights = []
    for cfg in configs:
        counts = np.bincount(cfg, minlength=K)
        # Dirichlet-multinomial mass (sequence probability) times likelihood
        log_w = (
            math.lgamma(K * alpha) - math.lgamma(K * alpha + n)
            + sum(math.lgamma(alpha + c) - math.lgamma(alpha) for c in counts)
        )
        log_w += sum(math.log(topics[t, w]) for t, w in zip(cfg, words))
        weights.append(math.exp(log_w))
    weights = np.array(weights)
    return configs, weights / weights.sum()

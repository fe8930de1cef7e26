"""Discrepancy library against closed forms and brute-force oracles."""

import numpy as np
import pytest
from scipy.stats import norm

from popcheck import Dataset, LatentState, chi_squared_d, imi_d, log_predictive_d, mean_d, mse_d

from helpers import brute_force_imi


class TestMeanD:
    def test_small_cases(self):
        assert mean_d(Dataset.from_scalars([1.0, 2.0, 3.0])) == 2.0
        assert mean_d(Dataset.from_scalars([4.2] * 9)) == pytest.approx(4.2)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            mean_d(Dataset.from_scalars([]))

    def test_clt_bound(self):
        rng = np.random.default_rng(6)
        y = Dataset.from_scalars(5.0 + np.sqrt(2.0) * rng.standard_normal(10_000))
        assert abs(mean_d(y) - 5.0) < 0.05


class TestLogPredictiveD:
    def test_standard_normal_closed_form(self):
        y = Dataset.from_scalars([0.0])
        val = log_predictive_d(y, norm(0, 1).logpdf)
        assert val == pytest.approx(-0.5 * np.log(2 * np.pi))

    def test_duplication_invariance(self):
        rng = np.random.default_rng(0)
        vals = rng.standard_normal(6)
        single = log_predictive_d(Dataset.from_scalars(vals), norm(0, 1).logpdf)
        doubled = log_predictive_d(Dataset.from_scalars(np.tile(vals, 3)), norm(0, 1).logpdf)
        assert doubled == pytest.approx(single)

    def test_nonfinite_reported_with_index(self):
        y = Dataset.from_scalars([0.0, 1.0])

        def bad_density(points):
            return np.where(points > 0.5, -np.inf, -1.0)

        with pytest.raises(ValueError, match="index 1"):
            log_predictive_d(y, bad_density)

    def test_dp_large_alpha_matches_base_expectation(self):
        """As the concentration grows the predictive approaches the base measure.

        Oracle: E_F[log f] for F = N(5, 2) by quadrature.
        """
        from popcheck.models import DPModel

        base = norm(5.0, np.sqrt(2.0))
        grid = np.linspace(5 - 12, 5 + 12, 4001)
        oracle = np.trapezoid(base.pdf(grid) * base.logpdf(grid), grid)

        rng = np.random.default_rng(9)
        y_obs = Dataset.from_scalars(base.rvs(size=200, random_state=rng))
        model = DPModel(alpha=1e9, base=base)
        state = model.posterior_sample(y_obs, rng)
        y_eval = Dataset.from_scalars(base.rvs(size=4000, random_state=rng))
        val = log_predictive_d(y_eval, state.global_latent.log_density)
        assert abs(val - oracle) < 0.05


class TestChiSquaredD:
    @staticmethod
    def _moments_const(mean, var):
        return lambda y, state: (np.full(len(y), mean), np.full(len(y), var))

    def test_exact_fit_is_zero(self):
        y = Dataset.from_scalars([2.0, 2.0, 2.0])
        state = LatentState(global_latent=None)
        assert chi_squared_d(y, state, self._moments_const(2.0, 1.0)) == 0.0

    def test_one_sd_offset(self):
        y = Dataset.from_scalars([3.0, 2.0, 2.0])
        state = LatentState(global_latent=None)
        assert chi_squared_d(y, state, self._moments_const(2.0, 1.0)) == pytest.approx(1.0)

    def test_zero_variance_rejected(self):
        y = Dataset.from_scalars([1.0])
        state = LatentState(global_latent=None)
        with pytest.raises(ValueError):
            chi_squared_d(y, state, self._moments_const(1.0, 0.0))

    def test_expectation_under_true_model(self):
        # chi-square identity: mean N, so MC mean over 10,000 draws of the
        # N=20 statistic lies within 3 * sqrt(2N) / sqrt(10000)
        rng = np.random.default_rng(15)
        N, draws = 20, 10_000
        state = LatentState(global_latent=None)
        moments = self._moments_const(0.0, 1.0)
        total = 0.0
        for _ in range(draws):
            y = Dataset.from_scalars(rng.standard_normal(N))
            total += chi_squared_d(y, state, moments)
        assert abs(total / draws - N) < 3 * np.sqrt(2 * N) / np.sqrt(draws)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(3)
        vals = rng.standard_normal(12)
        state = LatentState(global_latent=None)
        moments = self._moments_const(0.3, 2.0)
        a = chi_squared_d(Dataset.from_scalars(vals), state, moments)
        b = chi_squared_d(Dataset.from_scalars(vals[::-1].copy()), state, moments)
        assert a == pytest.approx(b)


class TestMseD:
    def test_exact_fit(self):
        X = np.array([[1.0, 0.0], [0.0, 2.0]])
        theta = np.array([3.0, 0.5])
        y = Dataset.from_regression(X, X @ theta)
        assert mse_d(y, LatentState(global_latent=theta)) == 0.0

    def test_single_residual(self):
        y = Dataset.from_regression(np.array([[1.0]]), np.array([2.0]))
        assert mse_d(y, LatentState(global_latent=np.array([0.0]))) == pytest.approx(4.0)

    def test_dimension_mismatch(self):
        y = Dataset.from_regression(np.ones((3, 2)), np.ones(3))
        with pytest.raises(ValueError):
            mse_d(y, LatentState(global_latent=np.ones(3)))

    def test_unit_noise_expectation(self):
        rng = np.random.default_rng(44)
        n, p = 10_000, 4
        X = rng.random((n, p))
        theta = rng.standard_normal(p)
        y = Dataset.from_regression(X, X @ theta + rng.standard_normal(n))
        assert abs(mse_d(y, LatentState(global_latent=theta)) - 1.0) < 0.05

    def test_permutation_invariance(self):
        rng = np.random.default_rng(5)
        X = rng.random((8, 3))
        yv = rng.standard_normal(8)
        theta = LatentState(global_latent=rng.standard_normal(3))
        perm = rng.permutation(8)
        a = mse_d(Dataset.from_regression(X, yv), theta)
        b = mse_d(Dataset.from_regression(X[perm], yv[perm]), theta)
        assert a == pytest.approx(b)


class TestImiD:
    def test_matching_doc_distribution_gives_zero(self):
        # both words occur once in every doc: H(d|k,w) = H(d|k)
        doc_ids = [0, 0, 1, 1, 2, 2]
        word_ids = [0, 1, 0, 1, 0, 1]
        corpus = Dataset.from_tokens(doc_ids, word_ids)
        imi = imi_d(corpus, np.zeros(6, dtype=int), K=1)
        np.testing.assert_allclose(imi.values[0, :2], 0.0, atol=1e-12)

    def test_single_document_word(self):
        # word 1 sits in one doc while the topic spans three: IMI = H(d|k)
        doc_ids = [0, 1, 2, 0, 0]
        word_ids = [0, 0, 0, 1, 1]
        corpus = Dataset.from_tokens(doc_ids, word_ids)
        imi = imi_d(corpus, np.zeros(5, dtype=int), K=1)
        assert imi.values[0, 1] == pytest.approx(imi.conditional_entropy[0])

    def test_counts_example_against_oracle(self):
        # 3 docs x 2 words, one topic, counts ((2,0),(1,1),(1,1))
        doc_ids = [0, 0, 1, 1, 2, 2]
        word_ids = [0, 0, 0, 1, 0, 1]
        assignments = np.zeros(6, dtype=int)
        corpus = Dataset.from_tokens(doc_ids, word_ids)
        imi = imi_d(corpus, assignments, K=1)
        oracle_vals, oracle_h = brute_force_imi(doc_ids, word_ids, assignments, K=1, V=2)
        np.testing.assert_allclose(imi.conditional_entropy, oracle_h, atol=1e-12)
        np.testing.assert_allclose(imi.values, oracle_vals, atol=1e-12)

    def test_random_corpora_against_oracle(self):
        rng = np.random.default_rng(21)
        for _ in range(10):
            n = int(rng.integers(5, 60))
            D, V, K = 4, 5, 3
            doc_ids = rng.integers(0, D, n)
            word_ids = rng.integers(0, V, n)
            assignments = rng.integers(0, K, n)
            corpus = Dataset.from_tokens(doc_ids, word_ids, n_docs=D, vocab_size=V)
            imi = imi_d(corpus, assignments, K=K)
            oracle_vals, oracle_h = brute_force_imi(
                doc_ids.tolist(), word_ids.tolist(), assignments.tolist(), K=K, V=V
            )
            np.testing.assert_allclose(imi.values, oracle_vals, atol=1e-12, equal_nan=True)
            np.testing.assert_allclose(imi.conditional_entropy, oracle_h, atol=1e-12,
                                       equal_nan=True)

    def test_empty_topic_row_undefined(self):
        corpus = Dataset.from_tokens([0, 1], [0, 1])
        imi = imi_d(corpus, np.zeros(2, dtype=int), K=2)
        assert np.all(np.isnan(imi.values[1]))
        assert np.isnan(imi.conditional_entropy[1])

    def test_bounds_on_generated_corpora(self):
        from popcheck.models import generate_corpus

        rng = np.random.default_rng(31)
        K, V, D = 3, 40, 30
        topics = rng.gamma(0.1, size=(K, V))
        topics /= topics.sum(axis=1, keepdims=True)
        props = rng.gamma(0.1, size=(D, K))
        props /= props.sum(axis=1, keepdims=True)
        doc_ids, word_ids, assignments = generate_corpus(
            topics, props, np.full(D, 40), rng
        )
        corpus = Dataset.from_tokens(doc_ids, word_ids, n_docs=D, vocab_size=V)
        imi = imi_d(corpus, assignments, K=K)
        defined = np.isfinite(imi.values)
        bound = np.broadcast_to(imi.conditional_entropy[:, None], imi.values.shape)
        assert np.all(imi.values[defined] <= bound[defined] + 1e-9)
        assert np.nanmin(imi.values) >= -1e-9

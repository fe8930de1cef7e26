"""Topic model: collapsed Gibbs fit, fixed-topic inference, generation."""

import itertools

import numpy as np
import pytest

from popcheck import Dataset
from popcheck.models import (
    generate_corpus,
    lda_generate,
    lda_gibbs_fit,
    lda_local_posterior,
    local_posterior_draws,
)

from helpers import enumerate_local_assignments


def toy_corpus(rng, D=12, V=9, K_true=3, length=30, sharp=True):
    """Synthetic corpus; ``sharp`` gives disjoint vocabulary supports."""
    topics = np.zeros((K_true, V))
    block = V // K_true
    for k in range(K_true):
        if sharp:
            topics[k, k * block:(k + 1) * block] = 1.0 / block
        else:
            topics[k] = rng.gamma(0.5, size=V)
            topics[k] /= topics[k].sum()
    props = rng.gamma(0.2, size=(D, K_true))
    props /= props.sum(axis=1, keepdims=True)
    doc_ids, word_ids, _ = generate_corpus(topics, props, np.full(D, length), rng)
    return Dataset.from_tokens(doc_ids, word_ids, n_docs=D, vocab_size=V), topics


class TestGibbsFit:
    def test_single_topic_is_smoothed_frequency(self):
        rng = np.random.default_rng(0)
        corpus = Dataset.from_tokens([0, 0, 1, 1, 1], [0, 1, 1, 2, 2], vocab_size=4)
        eta = 0.3
        state = lda_gibbs_fit(corpus, K=1, eta=eta, sweeps=6, rng=rng)
        counts = np.bincount(corpus.word_ids, minlength=4)
        expect = (counts + eta) / (len(corpus) + 4 * eta)
        np.testing.assert_allclose(state.topics[0], expect, atol=1e-12)

    def test_count_conservation(self):
        rng = np.random.default_rng(1)
        corpus, _ = toy_corpus(rng)
        state = lda_gibbs_fit(corpus, K=4, sweeps=10, rng=rng)
        n_kw = np.zeros((4, corpus.vocab_size), dtype=int)
        n_dk = np.zeros((corpus.n_docs, 4), dtype=int)
        np.add.at(n_kw, (state.assignments, corpus.word_ids), 1)
        np.add.at(n_dk, (corpus.doc_ids, state.assignments), 1)
        assert n_kw.sum() == len(corpus)
        assert n_dk.sum() == len(corpus)

    def test_rows_stochastic(self):
        rng = np.random.default_rng(2)
        corpus, _ = toy_corpus(rng)
        state = lda_gibbs_fit(corpus, K=3, sweeps=12, rng=rng)
        np.testing.assert_allclose(state.topics.sum(axis=1), 1.0, atol=1e-9)
        np.testing.assert_allclose(state.doc_proportions.sum(axis=1), 1.0, atol=1e-9)
        assert np.all(state.topics >= 0) and np.all(state.doc_proportions >= 0)

    def test_recovers_separated_topics(self):
        # disjoint vocabulary supports force recovery up to permutation
        rng = np.random.default_rng(3)
        corpus, true_topics = toy_corpus(rng, D=30, V=9, K_true=3, length=60)
        state = lda_gibbs_fit(corpus, K=3, sweeps=60, rng=rng)
        best = min(
            max(0.5 * np.abs(state.topics[list(perm)] - true_topics).sum(axis=1))
            for perm in itertools.permutations(range(3))
        )
        assert best < 0.1

    def test_validation(self):
        corpus = Dataset.from_tokens([0], [0])
        with pytest.raises(ValueError):
            lda_gibbs_fit(corpus, K=0)
        with pytest.raises(ValueError):
            lda_gibbs_fit(corpus, K=1, eta=0.0)


class TestLocalPosterior:
    def test_single_topic_degenerate(self):
        doc = Dataset.from_tokens([0, 0, 0], [0, 1, 0], vocab_size=2)
        topics = np.array([[0.5, 0.5]])
        z, t = lda_local_posterior(doc, topics, alpha_dir=0.1, sweeps=5,
                                   rng=np.random.default_rng(0))
        np.testing.assert_allclose(z, [1.0])
        assert set(t) == {0}

    def test_support_forces_topic(self):
        # words live only in topic 1's vocabulary; tiny alpha pins the mass
        doc = Dataset.from_tokens([0] * 6, [3, 4, 3, 4, 3, 4], vocab_size=6)
        topics = np.array([
            [1 / 3, 1 / 3, 1 / 3, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1 / 3, 1 / 3, 1 / 3],
        ])
        z, t = lda_local_posterior(doc, topics, alpha_dir=1e-4, sweeps=30,
                                   rng=np.random.default_rng(1))
        assert z[1] > 0.99
        assert set(t) == {1}

    def test_matches_enumeration_oracle(self):
        # 2 topics x 3 tokens: all 8 assignment configurations enumerate
        rng = np.random.default_rng(5)
        topics = np.array([[0.6, 0.3, 0.1], [0.1, 0.2, 0.7]])
        words = [0, 2, 1]
        alpha = 0.4
        doc = Dataset.from_tokens([0, 0, 0], words, vocab_size=3)
        configs, weights = enumerate_local_assignments(np.array(words), topics, alpha)
        exact_marginal = np.zeros(3)  # P(token i assigned to topic 1)
        for cfg, w in zip(configs, weights):
            for i, t in enumerate(cfg):
                exact_marginal[i] += w * t

        draws = 3000
        freq = np.zeros(3)
        for r in range(draws):
            _, t = lda_local_posterior(doc, topics, alpha_dir=alpha, sweeps=10,
                                       rng=np.random.default_rng((500, r)))
            freq += t
        freq /= draws
        se = np.sqrt(exact_marginal * (1 - exact_marginal) / draws)
        assert np.all(np.abs(freq - exact_marginal) < 3 * se + 1e-9)

    def test_batch_draw_shapes(self):
        rng = np.random.default_rng(7)
        corpus, topics = toy_corpus(rng, D=6, length=15)
        z_draws, t_draws = local_posterior_draws(corpus, topics, 0.1, n_draws=11,
                                                 burn_in=5, thin=2, rng=rng)
        assert z_draws.shape == (11, 6, topics.shape[0])
        assert t_draws.shape == (11, len(corpus))
        np.testing.assert_allclose(z_draws.sum(axis=2), 1.0, atol=1e-9)


class TestGeneration:
    def test_degenerate_one_hot(self):
        topics = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
        z = np.array([0.0, 1.0])
        doc = lda_generate(topics, z, 40, np.random.default_rng(0))
        assert set(doc.word_ids) == {2}

    def test_marginal_word_frequencies(self):
        # empirical frequencies of many tokens match z' theta within +-0.01
        rng = np.random.default_rng(8)
        topics = rng.gamma(1.0, size=(3, 8))
        topics /= topics.sum(axis=1, keepdims=True)
        z = np.array([0.2, 0.5, 0.3])
        doc = lda_generate(topics, z, 100_000, rng)
        expect = z @ topics
        freq = np.bincount(doc.word_ids, minlength=8) / len(doc)
        assert np.max(np.abs(freq - expect)) < 0.01

    def test_reproducible(self):
        topics = np.array([[0.4, 0.6]])
        a = lda_generate(topics, np.array([1.0]), 30, np.random.default_rng(3))
        b = lda_generate(topics, np.array([1.0]), 30, np.random.default_rng(3))
        np.testing.assert_array_equal(a.word_ids, b.word_ids)

    def test_generate_corpus_lengths(self):
        topics = np.array([[0.5, 0.5], [0.9, 0.1]])
        Z = np.array([[1.0, 0.0], [0.0, 1.0], [0.5, 0.5]])
        doc_ids, word_ids, t = generate_corpus(topics, Z, np.array([4, 6, 2]),
                                               np.random.default_rng(1))
        assert list(np.bincount(doc_ids)) == [4, 6, 2]
        assert len(word_ids) == 12 and len(t) == 12

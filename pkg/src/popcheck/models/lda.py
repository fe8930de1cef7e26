"""Latent Dirichlet allocation at desk scale.

Fitting uses collapsed Gibbs over token assignments (count-based
conditionals); topic and proportion estimates are posterior-mean count ratios
averaged over the post-burn-in sweeps, with the first half of sweeps
discarded.  Per-document inference with topics held fixed uses a blocked
Gibbs sampler (assignments given proportions, proportions given counts) that
vectorizes across all documents of a corpus at once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..data import Dataset, LatentState
from ..engine import GroupedModel

__all__ = [
    "LDAState",
    "LDAFixedTopicModel",
    "lda_gibbs_fit",
    "lda_local_posterior",
    "lda_generate",
    "local_posterior_draws",
    "sample_assignments",
    "generate_corpus",
]


@dataclass(frozen=True)
class LDAState:
    """Fitted topic model: row-stochastic topics and document proportions."""

    topics: np.ndarray
    doc_proportions: np.ndarray
    assignments: np.ndarray
    eta: float
    alpha_dir: float


def lda_gibbs_fit(corpus: Dataset, K: int, eta: float = 0.1, alpha_dir: float = 0.1,
                  sweeps: int = 100, rng: np.random.Generator | None = None) -> LDAState:
    """Collapsed Gibbs fit of ``K`` topics to a token corpus."""
    if K < 1:
        raise ValueError("K must be >= 1")
    if eta <= 0 or alpha_dir <= 0:
        raise ValueError("Dirichlet hyperparameters must be positive")
    if len(corpus) == 0:
        raise ValueError("empty corpus")
    if rng is None:
        rng = np.random.default_rng(0)

    docs = corpus.doc_ids
    words = corpus.word_ids
    D, V, n = corpus.n_docs, corpus.vocab_size, len(corpus)

    z = rng.integers(0, K, size=n)
    n_kw = np.zeros((K, V))
    n_k = np.zeros(K)
    n_dk = np.zeros((D, K))
    np.add.at(n_kw, (z, words), 1.0)
    np.add.at(n_k, z, 1.0)
    np.add.at(n_dk, (docs, z), 1.0)

    burn_in = sweeps // 2
    topics_acc = np.zeros((K, V))
    props_acc = np.zeros((D, K))
    kept = 0
    n_d = np.bincount(docs, minlength=D).astype(float)

    for sweep in range(sweeps):
        u = rng.random(n)
        for i in range(n):
            d, w, k = docs[i], words[i], z[i]
            n_kw[k, w] -= 1.0
            n_k[k] -= 1.0
            n_dk[d, k] -= 1.0
            p = (n_kw[:, w] + eta) / (n_k + V * eta) * (n_dk[d] + alpha_dir)
            csum = np.cumsum(p)
            k = int(np.searchsorted(csum, u[i] * csum[-1], side="right"))
            z[i] = k
            n_kw[k, w] += 1.0
            n_k[k] += 1.0
            n_dk[d, k] += 1.0
        if sweep >= burn_in:
            topics_acc += (n_kw + eta) / (n_k + V * eta)[:, None]
            props_acc += (n_dk + alpha_dir) / (n_d + K * alpha_dir)[:, None]
            kept += 1
    if kept == 0:  # degenerate sweep count: estimate from final counts
        topics_acc = (n_kw + eta) / (n_k + V * eta)[:, None]
        props_acc = (n_dk + alpha_dir) / (n_d + K * alpha_dir)[:, None]
        kept = 1
    return LDAState(
        topics=topics_acc / kept,
        doc_proportions=props_acc / kept,
        assignments=z.copy(),
        eta=eta,
        alpha_dir=alpha_dir,
    )


# ---------------------------------------------------------------------------
# Fixed-topic inference and generation
# ---------------------------------------------------------------------------


def _dirichlet_rows(alpha_plus_counts: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    draws = rng.gamma(alpha_plus_counts)
    return draws / draws.sum(axis=1, keepdims=True)


def _blocked_sweeps(doc_idx, words, topics, alpha_dir, z, sweeps, rng, collect_every=0):
    """Alternate assignments given proportions and proportions given counts.

    Returns the final ``(z, t)`` plus, when ``collect_every > 0``, the list of
    collected ``(z, t)`` snapshots (one every ``collect_every`` sweeps).
    """
    D, K = z.shape
    theta_at_w = topics[:, words].T  # (n, K), gathered once
    snapshots = []
    t = None
    for sweep in range(1, sweeps + 1):
        probs = z[doc_idx] * theta_at_w
        csum = np.cumsum(probs, axis=1)
        u = rng.random(len(words)) * csum[:, -1]
        t = (u[:, None] < csum).argmax(axis=1)
        counts = np.zeros((D, K))
        np.add.at(counts, (doc_idx, t), 1.0)
        z = _dirichlet_rows(alpha_dir + counts, rng)
        if collect_every and sweep % collect_every == 0:
            snapshots.append((z.copy(), t.copy()))
    return z, t, snapshots


def lda_local_posterior(doc: Dataset, topics: np.ndarray, alpha_dir: float,
                        sweeps: int, rng: np.random.Generator):
    """Proportions and assignments for one document, topics held fixed.

    Returns a draw ``(z, assignments)`` from the joint conditional given the
    document's words.
    """
    if len(doc) == 0:
        raise ValueError("empty document")
    K = topics.shape[0]
    z0 = _dirichlet_rows(np.full((1, K), alpha_dir), rng)
    doc_idx = np.zeros(len(doc), dtype=np.int64)
    z, t, _ = _blocked_sweeps(doc_idx, doc.word_ids, topics, alpha_dir, z0, sweeps, rng)
    return z[0], t


def local_posterior_draws(corpus: Dataset, topics: np.ndarray, alpha_dir: float,
                          n_draws: int, burn_in: int, thin: int,
                          rng: np.random.Generator):
    """Thinned chain of per-document proportion/assignment draws.

    One chain runs over all documents at once (documents are conditionally
    independent given the topics).  Returns ``(z_draws, t_draws)`` with
    shapes ``(n_draws, D, K)`` and ``(n_draws, n_tokens)``; document rows
    follow ``corpus.group_labels()`` order.
    """
    labels = corpus.group_labels()
    label_to_row = {g: i for i, g in enumerate(labels)}
    doc_idx = np.array([label_to_row[g] for g in corpus.doc_ids], dtype=np.int64)
    D, K = len(labels), topics.shape[0]
    z0 = _dirichlet_rows(np.full((D, K), alpha_dir), rng)
    _, _, snaps = _blocked_sweeps(
        doc_idx, corpus.word_ids, topics, alpha_dir, z0,
        sweeps=burn_in + thin * n_draws, rng=rng, collect_every=thin,
    )
    snaps = snaps[-n_draws:]
    z_draws = np.stack([s[0] for s in snaps])
    t_draws = np.stack([s[1] for s in snaps])
    return z_draws, t_draws


def sample_assignments(corpus: Dataset, z_by_row: np.ndarray, doc_idx: np.ndarray,
                       topics: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Token-topic assignments given fixed proportions and topics."""
    probs = z_by_row[doc_idx] * topics[:, corpus.word_ids].T
    csum = np.cumsum(probs, axis=1)
    u = rng.random(len(corpus)) * csum[:, -1]
    return (u[:, None] < csum).argmax(axis=1)


def lda_generate(topics: np.ndarray, z_j: np.ndarray, length: int,
                 rng: np.random.Generator, doc_id: int = 0) -> Dataset:
    """Generate one document: topic from ``z_j`` then word from that topic."""
    doc_ids, word_ids, _ = generate_corpus(
        topics, np.asarray(z_j, dtype=float)[None, :], np.array([length]), rng
    )
    return Dataset.from_tokens(
        np.full(length, doc_id), word_ids,
        n_docs=max(doc_id + 1, 1), vocab_size=topics.shape[1],
    )


def generate_corpus(topics: np.ndarray, Z: np.ndarray, lengths: np.ndarray,
                    rng: np.random.Generator):
    """Generate tokens for many documents at once.

    ``Z`` holds one proportion row per document, ``lengths`` the token count
    of each.  Returns ``(doc_ids, word_ids, assignments)`` arrays.
    """
    K, V = topics.shape
    lengths = np.asarray(lengths, dtype=np.int64)
    doc_ids = np.repeat(np.arange(len(lengths)), lengths)
    n = int(lengths.sum())
    # topic per token from its document's proportions
    zc = np.cumsum(Z, axis=1)[doc_ids]
    u = rng.random(n) * zc[:, -1]
    t = (u[:, None] < zc).argmax(axis=1)
    # word per token from its topic's row, grouped by topic
    word_ids = np.zeros(n, dtype=np.int64)
    u2 = rng.random(n)
    topic_cdfs = np.cumsum(topics, axis=1)
    for k in range(K):
        sel = t == k
        if sel.any():
            word_ids[sel] = np.searchsorted(topic_cdfs[k], u2[sel] * topic_cdfs[k, -1],
                                            side="right")
    word_ids = np.minimum(word_ids, V - 1)
    return doc_ids, word_ids, t


class LDAFixedTopicModel(GroupedModel):
    """Grouped-model adapter with a fixed, already-fitted topic matrix.

    Locals are per-document proportion vectors.  The local posterior runs the
    blocked Gibbs sampler on the group's observed tokens.
    """

    name = "lda_fixed_topics"

    def __init__(self, topics: np.ndarray, alpha_dir: float = 0.1,
                 local_sweeps: int = 50):
        self.topics = np.asarray(topics, dtype=float)
        self.alpha_dir = float(alpha_dir)
        self.local_sweeps = int(local_sweeps)

    def posterior_sample(self, y_obs: Dataset, rng: np.random.Generator) -> LatentState:
        return LatentState(global_latent=self.topics)

    def local_prior_sample(self, state: LatentState, group, rng: np.random.Generator):
        return _dirichlet_rows(np.full((1, self.topics.shape[0]), self.alpha_dir), rng)[0]

    def local_posterior_sample(self, y_obs_j: Dataset, state: LatentState, group,
                               rng: np.random.Generator):
        z, _ = lda_local_posterior(y_obs_j, self.topics, self.alpha_dir,
                                   self.local_sweeps, rng)
        return z

    def local_predictive_sample(self, state: LatentState, local, group, size: int,
                                rng: np.random.Generator) -> Dataset:
        return lda_generate(self.topics, local, size, rng)

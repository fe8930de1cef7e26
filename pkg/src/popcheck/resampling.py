"""Splitting a fixed data pool into conditioning and reference parts.

Four schemes produce ``(y_obs, y_new)`` pairs from a pool ``y``:

* cross-validation: ``m`` points without replacement, remainder held out;
* out-of-bag bootstrap: ``n`` draws with replacement, complement held out;
* double bootstrap: two independent with-replacement resamples;
* p-bootstrap: bootstrap ``y_obs``, then ``y_new`` from a ``p``-weighted
  mixture of out-of-bag and in-bag points.

Identity is by pool index, not value: duplicated values are distinct
observations, which makes the multiset difference unambiguous.  All functions
are pure in ``(pool, rng)`` and safe for concurrent use with independent
streams.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset

__all__ = [
    "EmptySplitError",
    "EmpiricalDistribution",
    "SplitScheme",
    "cv_split",
    "oob_split",
    "double_bootstrap_split",
    "p_bootstrap_split",
]


class EmptySplitError(Exception):
    """A scheme produced an empty held-out part; callers may redraw."""


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Uniform distribution over the points of a fixed pool."""

    pool: Dataset

    def draw(self, m: int, with_replacement: bool, rng: np.random.Generator) -> Dataset:
        n = len(self.pool)
        if with_replacement:
            idx = rng.integers(0, n, size=m)
        else:
            if m > n:
                raise ValueError(f"cannot draw {m} of {n} points without replacement")
            idx = rng.choice(n, size=m, replace=False)
        return self.pool.take(idx)


def _group_blocks(y: Dataset):
    """Group labels and the index list of each group, in label order."""
    labels = y.group_labels()
    blocks = [np.flatnonzero(y.group_ids == g) for g in labels]
    return labels, blocks


def cv_split(y: Dataset, m: int, rng: np.random.Generator, unit: str = "point"):
    """Cross-validation split: ``m`` units without replacement vs. the rest.

    With ``unit="group"`` whole groups are sampled and never split apart.
    """
    if unit == "group":
        labels, blocks = _group_blocks(y)
        k = len(labels)
        if not 1 <= m < k:
            raise ValueError(f"need 1 <= m < {k} groups, got m={m}")
        chosen = rng.choice(k, size=m, replace=False)
        mask = np.zeros(k, dtype=bool)
        mask[chosen] = True
        obs_idx = np.concatenate([blocks[i] for i in range(k) if mask[i]])
        new_idx = np.concatenate([blocks[i] for i in range(k) if not mask[i]])
        return y.take(obs_idx), y.take(new_idx)

    n = len(y)
    if not 1 <= m < n:
        raise ValueError(f"need 1 <= m < {n}, got m={m}")
    obs_idx = rng.choice(n, size=m, replace=False)
    mask = np.zeros(n, dtype=bool)
    mask[obs_idx] = True
    new_idx = np.flatnonzero(~mask)
    return y.take(obs_idx), y.take(new_idx)


def oob_split(y: Dataset, rng: np.random.Generator, subsample: int | None = None):
    """Bootstrap ``y_obs`` with the out-of-bag complement as ``y_new``.

    The complement is deterministic given the bag.  ``subsample`` optionally
    draws that many points uniformly from the out-of-bag set instead of
    returning all of it.  Raises :class:`EmptySplitError` when every pool
    index was drawn (callers redraw; inevitable at ``n == 1``).
    """
    n = len(y)
    bag = rng.integers(0, n, size=n)
    mask = np.zeros(n, dtype=bool)
    mask[bag] = True
    out = np.flatnonzero(~mask)
    if len(out) == 0:
        raise EmptySplitError("bootstrap bag covered the whole pool")
    if subsample is not None:
        out = out[rng.integers(0, len(out), size=subsample)]
    return y.take(bag), y.take(out)


def double_bootstrap_split(y: Dataset, rng: np.random.Generator):
    """Both parts are independent with-replacement resamples of the pool."""
    n = len(y)
    if n < 1:
        raise ValueError("empty pool")
    bag = rng.integers(0, n, size=n)
    new = rng.integers(0, n, size=n)
    return y.take(bag), y.take(new)


def p_bootstrap_split(y: Dataset, p: float, rng: np.random.Generator):
    """Bootstrap ``y_obs``; draw ``y_new`` from p*Emp(oob) + (1-p)*Emp(bag).

    ``p`` controls how many points of ``y_new`` are unseen in ``y_obs``:
    ``p=0`` reduces to the double bootstrap restricted to the bag, ``p=1``
    draws entirely out-of-bag, and ``p=0.632`` is the classic 632 estimator.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    n = len(y)
    bag = rng.integers(0, n, size=n)
    mask = np.zeros(n, dtype=bool)
    mask[bag] = True
    out = np.flatnonzero(~mask)
    if len(out) == 0 and p > 0.0:
        raise EmptySplitError("out-of-bag set empty; p-mixture degenerate")
    use_out = rng.random(n) < p
    # draw both components unconditionally to keep the stream layout fixed
    out_pick = out[rng.integers(0, max(len(out), 1), size=n)] if len(out) else np.zeros(n, dtype=np.int64)
    bag_pick = bag[rng.integers(0, n, size=n)]
    new = np.where(use_out, out_pick, bag_pick)
    return y.take(bag), y.take(new)


@dataclass(frozen=True)
class SplitScheme:
    """Named split rule with its parameters.

    ``kind`` is one of ``"cv"``, ``"oob"``, ``"double_bootstrap"``,
    ``"p_bootstrap"``.  ``m`` applies to cv (default: half the pool, rounded
    up), ``p`` to the p-bootstrap.  ``unit="group"`` resamples whole groups
    for grouped pools.
    """

    kind: str
    m: int | None = None
    p: float | None = None
    unit: str = "point"

    KINDS = ("cv", "oob", "double_bootstrap", "p_bootstrap")

    def __post_init__(self) -> None:
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown scheme {self.kind!r}; valid: {self.KINDS}")
        if self.kind == "p_bootstrap":
            if self.p is None or not 0.0 <= self.p <= 1.0:
                raise ValueError("p_bootstrap needs p in [0, 1]")
        if self.unit not in ("point", "group"):
            raise ValueError("unit must be 'point' or 'group'")

    @property
    def label(self) -> str:
        if self.kind == "cv":
            return "cv" if self.m is None else f"cv{self.m}"
        if self.kind == "p_bootstrap":
            return f"p_bootstrap_{self.p:g}"
        return self.kind

    def split(self, y: Dataset, rng: np.random.Generator):
        if self.kind == "cv":
            if self.unit == "group":
                total = len(y.group_labels())
            else:
                total = len(y)
            m = self.m if self.m is not None else (total + 1) // 2
            return cv_split(y, m, rng, unit=self.unit)
        if self.unit == "group":
            raise ValueError(f"group-unit resampling not supported for {self.kind}")
        if self.kind == "oob":
            return oob_split(y, rng)
        if self.kind == "double_bootstrap":
            return double_bootstrap_split(y, rng)
        return p_bootstrap_split(y, self.p, rng)

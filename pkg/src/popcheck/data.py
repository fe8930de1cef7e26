"""Core data containers: observation datasets and latent states.

A :class:`Dataset` is an ordered collection of observations of a single
variant: scalars, regression pairs ``(x_i, y_i)``, or tokens
``(doc_id, word_id)``.  Observations are identified by index, so duplicated
values remain distinct points (this is what makes multiset differences in the
resampling schemes well defined).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

__all__ = ["Dataset", "LatentState"]


@dataclass(frozen=True)
class Dataset:
    """Homogeneous observation container.

    ``kind`` is one of ``"scalar"``, ``"regression"``, ``"token"``.  Only the
    fields for the active variant are populated; accessors raise on mismatch.
    ``group_ids``, when present, aligns with observations (tokens default to
    their document id).
    """

    kind: str
    _values: np.ndarray | None = None
    _X: np.ndarray | None = None
    _y: np.ndarray | None = None
    _doc_ids: np.ndarray | None = None
    _word_ids: np.ndarray | None = None
    group_ids: np.ndarray | None = None
    n_docs: int | None = None
    vocab_size: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("scalar", "regression", "token"):
            raise ValueError(f"unknown dataset kind: {self.kind!r}")
        if self.group_ids is not None and len(self.group_ids) != len(self):
            raise ValueError("group_ids length does not match observations")

    # -- constructors -----------------------------------------------------

    @staticmethod
    def from_scalars(values, group_ids=None) -> "Dataset":
        values = np.asarray(values, dtype=float)
        if values.ndim != 1:
            raise ValueError("scalar data must be one-dimensional")
        gid = None if group_ids is None else np.asarray(group_ids)
        return Dataset(kind="scalar", _values=values, group_ids=gid)

    @staticmethod
    def from_regression(X, y, group_ids=None) -> "Dataset":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
            raise ValueError("need X with shape (n, p) and y with shape (n,)")
        gid = None if group_ids is None else np.asarray(group_ids)
        return Dataset(kind="regression", _X=X, _y=y, group_ids=gid)

    @staticmethod
    def from_tokens(doc_ids, word_ids, n_docs=None, vocab_size=None) -> "Dataset":
        doc_ids = np.asarray(doc_ids, dtype=np.int64)
        word_ids = np.asarray(word_ids, dtype=np.int64)
        if doc_ids.shape != word_ids.shape or doc_ids.ndim != 1:
            raise ValueError("doc_ids and word_ids must be aligned 1-d arrays")
        if n_docs is None:
            n_docs = int(doc_ids.max()) + 1 if len(doc_ids) else 0
        if vocab_size is None:
            vocab_size = int(word_ids.max()) + 1 if len(word_ids) else 0
        if len(doc_ids) and (doc_ids.min() < 0 or doc_ids.max() >= n_docs):
            raise ValueError("doc ids outside [0, n_docs)")
        if len(word_ids) and (word_ids.min() < 0 or word_ids.max() >= vocab_size):
            raise ValueError("word ids outside [0, vocab_size)")
        return Dataset(
            kind="token",
            _doc_ids=doc_ids,
            _word_ids=word_ids,
            group_ids=doc_ids,
            n_docs=n_docs,
            vocab_size=vocab_size,
        )

    # -- accessors ---------------------------------------------------------

    def _require(self, kind: str) -> None:
        if self.kind != kind:
            raise ValueError(f"{kind} access on {self.kind} dataset")

    @property
    def values(self) -> np.ndarray:
        self._require("scalar")
        return self._values

    @property
    def X(self) -> np.ndarray:
        self._require("regression")
        return self._X

    @property
    def y(self) -> np.ndarray:
        self._require("regression")
        return self._y

    @property
    def doc_ids(self) -> np.ndarray:
        self._require("token")
        return self._doc_ids

    @property
    def word_ids(self) -> np.ndarray:
        self._require("token")
        return self._word_ids

    def __len__(self) -> int:
        if self.kind == "scalar":
            return len(self._values)
        if self.kind == "regression":
            return len(self._y)
        return len(self._doc_ids)

    # -- manipulation -------------------------------------------------------

    def take(self, indices) -> "Dataset":
        """Subset by observation index (duplicates allowed, order kept)."""
        idx = np.asarray(indices, dtype=np.int64)
        gid = None if self.group_ids is None else self.group_ids[idx]
        if self.kind == "scalar":
            return Dataset(kind="scalar", _values=self._values[idx], group_ids=gid)
        if self.kind == "regression":
            return Dataset(
                kind="regression", _X=self._X[idx], _y=self._y[idx], group_ids=gid
            )
        return Dataset(
            kind="token",
            _doc_ids=self._doc_ids[idx],
            _word_ids=self._word_ids[idx],
            group_ids=self._doc_ids[idx],
            n_docs=self.n_docs,
            vocab_size=self.vocab_size,
        )

    def group_labels(self) -> np.ndarray:
        if self.group_ids is None:
            raise ValueError("dataset carries no group ids")
        return np.unique(self.group_ids)

    def group(self, label) -> "Dataset":
        """All observations belonging to one group."""
        if self.group_ids is None:
            raise ValueError("dataset carries no group ids")
        return self.take(np.flatnonzero(self.group_ids == label))


@dataclass(frozen=True)
class LatentState:
    """Model latent variables: one global value plus optional per-group locals."""

    global_latent: Any
    local_latents: dict | None = None

    def validate_groups(self, dataset: Dataset) -> None:
        """Check that local latent keys are a subset of the dataset's groups."""
        if not self.local_latents:
            return
        labels = set(np.asarray(dataset.group_labels()).tolist())
        extra = set(self.local_latents) - labels
        if extra:
            raise ValueError(f"local latents for unknown groups: {sorted(extra)}")

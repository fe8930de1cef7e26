"""Deterministic random-number substreams.

All Monte Carlo entropy in the package flows through a single 64-bit master
seed.  Independent substreams are derived by keying a ``SeedSequence`` with an
integer tuple (replication index, grid index, ...), so results never depend on
execution order or thread count.  Hot loops use :class:`CounterStreams`,
which maps replication ``r`` to counter block ``r`` of one Philox stream and
is therefore order-independent without per-replication setup cost.
"""

from __future__ import annotations

import numpy as np

__all__ = ["substream", "derive_seed", "CounterStreams"]


def substream(seed: int, *key: int) -> np.random.Generator:
    """Generator for the substream of ``seed`` keyed by the integers ``key``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


def derive_seed(seed: int, *key: int) -> int:
    """Derive a new 64-bit seed from ``seed`` and an integer key tuple.

    Used to give each check in a sweep its own master seed while keeping the
    whole sweep reproducible from one number.
    """
    ss = np.random.SeedSequence(seed, spawn_key=tuple(key))
    return int(ss.generate_state(1, np.uint64)[0])


class CounterStreams:
    """Per-replication generators as counter blocks of one Philox stream.

    Replication ``r`` starts at counter ``(0, 0, r, 0)`` of the Philox
    cipher keyed by ``seed``, giving 2^128 draws of headroom per replication
    and bit-identical streams regardless of the order replications run in.
    Not thread-safe: each thread should hold its own instance.
    """

    def __init__(self, seed: int):
        key = np.random.SeedSequence(seed).generate_state(2, np.uint64)
        self._bitgen = np.random.Philox(key=int(key[0]) | (int(key[1]) << 64))
        self._template = self._bitgen.state
        self._rng = np.random.Generator(self._bitgen)

    def replication(self, r: int) -> np.random.Generator:
        state = self._template
        state["state"]["counter"][2] = r
        state["buffer_pos"] = 4  # discard any buffered block
        self._bitgen.state = state
        return self._rng

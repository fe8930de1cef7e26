"""Check engine: discrepancies, distances, and the four check estimators.

A check is a Monte Carlo estimate of ``E[g(d(rep), d(reference))]`` where the
replicated data come from a model's predictive distribution and the reference
is, depending on the check, the observed data (posterior / prior predictive
check), fresh draws from the population (ideal population check), or a
resampled surrogate for the population (estimated population check).

Replication ``r`` always draws from the substream keyed by ``r`` of the
check's seed, so results are bit-identical regardless of execution order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .data import Dataset, LatentState
from .resampling import EmptySplitError, SplitScheme
from .rng import CounterStreams

__all__ = [
    "CheckError",
    "Discrepancy",
    "DistanceFn",
    "indicator",
    "absolute",
    "vector_deviance",
    "evaluate_distance",
    "CheckConfig",
    "CheckResult",
    "Model",
    "GroupedModel",
    "run_ppc",
    "run_prior_pc",
    "run_popc_ideal",
    "run_popc_estimated",
    "summarize",
]

EMPTY_SPLIT_RETRIES = 100


class CheckError(RuntimeError):
    """Model sampling or evaluation failed inside a replication."""


# ---------------------------------------------------------------------------
# Discrepancies and distances
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Discrepancy:
    """A function of data (and optionally latent state) measuring model fit.

    ``kind`` is ``"simple"`` (data only), ``"realized-global"`` (data and the
    global latent), or ``"realized-local"`` (data, a per-group local latent,
    and the global latent).  The evaluator must be pure: deterministic given
    its inputs.  ``vector=True`` marks array-valued output.
    """

    name: str
    fn: Callable
    kind: str = "simple"
    vector: bool = False

    def __post_init__(self) -> None:
        if self.kind not in ("simple", "realized-global", "realized-local"):
            raise ValueError(f"unknown discrepancy kind {self.kind!r}")

    def evaluate(self, data: Dataset, state: LatentState | None = None, local=None):
        if self.kind == "simple":
            return self.fn(data)
        if self.kind == "realized-global":
            return self.fn(data, state)
        return self.fn(data, local, state)


@dataclass(frozen=True)
class DistanceFn:
    """Distance between two discrepancy values (measure of surprise).

    * ``indicator``: 1 if a > b else 0 (strict; ties score 0), scalars only.
    * ``absolute``: |a - b|, scalars only.
    * ``vector_deviance``: mean componentwise |a_i - b_i| over components
      that are defined (finite) in both arguments; NaN marks undefined.
    """

    kind: str

    KINDS = ("indicator", "absolute", "vector_deviance")

    def __post_init__(self) -> None:
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown distance {self.kind!r}; valid: {self.KINDS}")

    def __call__(self, a, b) -> float:
        return evaluate_distance(self, a, b)


def indicator() -> DistanceFn:
    return DistanceFn("indicator")


def absolute() -> DistanceFn:
    return DistanceFn("absolute")


def vector_deviance() -> DistanceFn:
    return DistanceFn("vector_deviance")


def _as_scalar(x, side: str) -> float:
    arr = np.asarray(x)
    if arr.ndim != 0 and arr.size != 1:
        raise ValueError(f"scalar distance got array-valued {side} discrepancy")
    return float(arr.reshape(()))


def evaluate_distance(g: DistanceFn, a, b) -> float:
    """Apply distance ``g`` to a pair of discrepancy values."""
    if g.kind == "vector_deviance":
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        if a.shape != b.shape:
            raise ValueError(f"arity mismatch: {a.shape} vs {b.shape}")
        if a.ndim == 0:
            raise ValueError("vector_deviance requires vector arity")
        both = np.isfinite(a) & np.isfinite(b)
        if not both.any():
            raise ValueError("no jointly defined components")
        return float(np.mean(np.abs(a[both] - b[both])))
    av = _as_scalar(a, "first")
    bv = _as_scalar(b, "second")
    if g.kind == "indicator":
        return 1.0 if av > bv else 0.0
    return abs(av - bv)


# ---------------------------------------------------------------------------
# Configuration, results, model contract
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CheckConfig:
    """Replication count, master seed and sizes for one check.

    ``rep_size`` defaults to the observed data size; the estimated population
    check ignores it and always sizes replicated data to match the held-out
    part.  ``scheme`` is only consulted by :func:`run_popc_estimated`.
    """

    replications: int
    seed: int
    rep_size: int | None = None
    scheme: SplitScheme | None = None

    def __post_init__(self) -> None:
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.rep_size is not None and self.rep_size < 1:
            raise ValueError("rep_size must be >= 1")


@dataclass(frozen=True)
class CheckResult:
    """Monte Carlo estimate with its per-replication trace."""

    estimate: float
    std_error: float
    per_rep_values: np.ndarray
    metadata: dict = field(default_factory=dict)

    @property
    def replications(self) -> int:
        return len(self.per_rep_values)


def _finish(values: np.ndarray, metadata: dict, g: DistanceFn, ties: int) -> CheckResult:
    estimate = float(values.mean())
    if len(values) > 1:
        std_error = float(values.std(ddof=1) / np.sqrt(len(values)))
    else:
        std_error = 0.0
    if g.kind == "indicator":
        metadata = dict(metadata, ties=ties)
    return CheckResult(estimate, std_error, values, metadata)


class Model:
    """Sampling contract required of any model under check.

    Implementations must be immutable after construction; all entropy enters
    through the caller-provided generator, and ``predictive_sample`` must be
    reproducible given the same state, size and stream.
    """

    name = "model"

    def posterior_sample(self, y_obs: Dataset, rng: np.random.Generator) -> LatentState:
        raise NotImplementedError

    def predictive_sample(
        self, state: LatentState, size: int, rng: np.random.Generator
    ) -> Dataset:
        raise NotImplementedError

    def prior_sample(self, rng: np.random.Generator) -> LatentState:
        raise NotImplementedError(f"{self.name} does not expose a prior sampler")

    def log_predictive_density(self, points: Dataset, state: LatentState) -> np.ndarray:
        raise NotImplementedError(f"{self.name} does not expose a predictive density")


class GroupedModel(Model):
    """Model contract extension for grouped data with per-group locals."""

    def local_prior_sample(self, state: LatentState, group, rng: np.random.Generator):
        raise NotImplementedError

    def local_posterior_sample(
        self, y_obs_j: Dataset, state: LatentState, group, rng: np.random.Generator
    ):
        raise NotImplementedError

    def local_predictive_sample(
        self, state: LatentState, local, group, size: int, rng: np.random.Generator
    ) -> Dataset:
        raise NotImplementedError


# ---------------------------------------------------------------------------
# Check estimators
# ---------------------------------------------------------------------------


def _loop(cfg: CheckConfig, one_rep) -> tuple[np.ndarray, int]:
    """Run ``one_rep(r, rng)`` for every replication on its own substream.

    Replication ``r`` draws from counter block ``r`` of the Philox stream
    keyed by the check seed, so the trace is bit-identical no matter how
    replications are scheduled.
    """
    values = np.empty(cfg.replications)
    ties = 0
    streams = CounterStreams(cfg.seed)
    for r in range(cfg.replications):
        rng = streams.replication(r)
        try:
            a, b, g = one_rep(r, rng)
        except (EmptySplitError, CheckError):
            raise
        except Exception as exc:  # noqa: BLE001 - annotate with the replication
            raise CheckError(f"replication {r} failed: {exc}") from exc
        values[r] = evaluate_distance(g, a, b)
        if isinstance(a, float) and isinstance(b, float):
            if a == b:
                ties += 1
        elif np.asarray(a).shape == () and np.asarray(b).shape == () and float(a) == float(b):
            ties += 1
    return values, ties


def run_ppc(
    model: Model,
    y_obs: Dataset,
    d: Discrepancy,
    g: DistanceFn,
    cfg: CheckConfig,
) -> CheckResult:
    """Posterior predictive check: reference the observed data themselves.

    Each replication draws the latent state from the posterior given
    ``y_obs`` and replicated data from the predictive given that state; a
    realized discrepancy sees the same state on both sides.
    """
    if len(y_obs) == 0:
        raise ValueError("y_obs must be nonempty")
    size = cfg.rep_size or len(y_obs)

    def one_rep(r, rng):
        state = model.posterior_sample(y_obs, rng)
        y_rep = model.predictive_sample(state, size, rng)
        return d.evaluate(y_rep, state), d.evaluate(y_obs, state), g

    values, ties = _loop(cfg, one_rep)
    meta = {
        "check": "ppc",
        "model": model.name,
        "discrepancy": d.name,
        "distance": g.kind,
        "replications": cfg.replications,
        "seed": cfg.seed,
        "rep_size": size,
    }
    return _finish(values, meta, g, ties)


def run_prior_pc(
    model: Model,
    y_obs: Dataset,
    d: Discrepancy,
    g: DistanceFn,
    cfg: CheckConfig,
) -> CheckResult:
    """Prior predictive check: like the PPC but with the state drawn from the
    prior, so replicated data come from the marginal distribution of data."""
    if len(y_obs) == 0:
        raise ValueError("y_obs must be nonempty")
    size = cfg.rep_size or len(y_obs)

    def one_rep(r, rng):
        state = model.prior_sample(rng)
        y_rep = model.predictive_sample(state, size, rng)
        return d.evaluate(y_rep, state), d.evaluate(y_obs, state), g

    values, ties = _loop(cfg, one_rep)
    meta = {
        "check": "prior_pc",
        "model": model.name,
        "discrepancy": d.name,
        "distance": g.kind,
        "replications": cfg.replications,
        "seed": cfg.seed,
        "rep_size": size,
    }
    return _finish(values, meta, g, ties)


def run_popc_ideal(
    model: Model,
    y_obs: Dataset,
    population: Callable[[int, np.random.Generator], Dataset],
    d: Discrepancy,
    g: DistanceFn,
    cfg: CheckConfig,
) -> CheckResult:
    """Ideal population check: reference fresh draws from the population.

    ``population(size, rng)`` must yield datasets of ``rep_size`` points.
    The state comes from the posterior given ``y_obs``, replicated data from
    the predictive, and the reference from the population, independently.
    """
    if len(y_obs) == 0:
        raise ValueError("y_obs must be nonempty")
    size = cfg.rep_size or len(y_obs)

    def one_rep(r, rng):
        state = model.posterior_sample(y_obs, rng)
        y_rep = model.predictive_sample(state, size, rng)
        y_new = population(size, rng)
        return d.evaluate(y_rep, state), d.evaluate(y_new, state), g

    values, ties = _loop(cfg, one_rep)
    meta = {
        "check": "popc_ideal",
        "model": model.name,
        "discrepancy": d.name,
        "distance": g.kind,
        "replications": cfg.replications,
        "seed": cfg.seed,
        "rep_size": size,
    }
    return _finish(values, meta, g, ties)


def run_popc_estimated(
    model: Model,
    y: Dataset,
    scheme: SplitScheme | None,
    d: Discrepancy,
    g: DistanceFn,
    cfg: CheckConfig,
) -> CheckResult:
    """Estimated population check over a fixed pool.

    Per replication: split the pool into ``(y_obs, y_new)``, draw the state
    from the posterior given ``y_obs``, draw replicated data sized to match
    ``y_new``, and score ``g(d(y_rep), d(y_new))``.  Splits with an empty
    held-out part are redrawn from the same stream, up to a retry cap.
    """
    if len(y) < 2:
        raise ValueError("pool must have at least 2 observations")
    scheme = scheme or cfg.scheme
    if scheme is None:
        raise ValueError("no split scheme given")

    def one_rep(r, rng):
        for _ in range(EMPTY_SPLIT_RETRIES):
            try:
                y_obs, y_new = scheme.split(y, rng)
                break
            except EmptySplitError:
                continue
        else:
            raise CheckError(
                f"replication {r}: empty held-out split "
                f"{EMPTY_SPLIT_RETRIES} times in a row"
            )
        state = model.posterior_sample(y_obs, rng)
        y_rep = model.predictive_sample(state, len(y_new), rng)
        return d.evaluate(y_rep, state), d.evaluate(y_new, state), g

    values, ties = _loop(cfg, one_rep)
    meta = {
        "check": "popc_estimated",
        "model": model.name,
        "discrepancy": d.name,
        "distance": g.kind,
        "replications": cfg.replications,
        "seed": cfg.seed,
        "scheme": scheme.label,
    }
    return _finish(values, meta, g, ties)


def summarize(result: CheckResult) -> dict:
    """Estimate, spread and a 20-bin histogram of the replication trace."""
    values = np.asarray(result.per_rep_values)
    if len(values) == 0:
        raise ValueError("empty replication trace")
    counts, edges = np.histogram(values, bins=20)
    return {
        "estimate": result.estimate,
        "std_error": result.std_error,
        "min": float(values.min()),
        "max": float(values.max()),
        "histogram": {
            "bin_edges": edges.tolist(),
            "counts": counts.tolist(),
        },
    }

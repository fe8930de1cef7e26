"""Reference experiments and the user-configured check harness.

Three reports sweep a model-complexity knob and emit one CSV (plus a rendered
figure) each:

* ``dp``: posterior vs. population predictive p-values for a Dirichlet-process
  model over a grid of concentrations;
* ``regression``: mean-squared-error checks for Bayesian linear regression
  over a grid of prior variances, with the ideal population check and its
  four resampling estimators;
* ``lda``: per-topic word/document IMI deviances for topic models of a
  synthetic corpus over a grid of topic counts.

Every sweep point derives its own check seed from the experiment master seed,
so grid points can run on any number of threads with identical output.
"""

from __future__ import annotations

import copy
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import Dataset
from .discrepancy import (
    imi_d,
    log_predictive_discrepancy,
    mean_discrepancy,
    mse_discrepancy,
)
from .engine import (
    CheckConfig,
    CheckResult,
    Discrepancy,
    absolute,
    indicator,
    run_popc_estimated,
    run_popc_ideal,
    run_ppc,
    run_prior_pc,
    summarize,
)
from .fileio import load_corpus_tsv, load_regression_csv, write_csv, write_json
from .hierarchy import within_group_split
from .models.blr import BLRModel, simulate_regression_data
from .models.dp import DPModel, Normal
from .models.lda import generate_corpus, lda_gibbs_fit, local_posterior_draws, sample_assignments
from .resampling import SplitScheme
from .rng import CounterStreams, derive_seed, substream

__all__ = [
    "ExperimentConfig",
    "ConfigError",
    "default_config",
    "cmd_dp",
    "cmd_regression",
    "cmd_lda",
    "cmd_custom",
]


class ConfigError(ValueError):
    """Invalid experiment configuration."""


EXPERIMENTS = ("dp", "regression", "lda", "custom")

DISTANCES = ("indicator", "absolute")
CUSTOM_MODELS = ("dp", "blr")
CUSTOM_DISCREPANCIES = ("mean", "log_predictive", "mse")
CUSTOM_CHECKS = ("ppc", "prior_pc", "popc_ideal", "popc_estimated")
CUSTOM_DATA = ("normal", "inline_scalars", "simulate_regression", "regression_csv", "corpus_tsv")

_DEFAULTS = {
    "dp": {
        "experiment": "dp",
        "seed": 12,
        "replications": 10_000,
        "threads": 1,
        "sweep": {"log_alpha_min": -3.0, "log_alpha_max": 6.0, "points": 16},
        "check": {"rep_size": 40},
        "dp": {"n_obs": 10, "base_mean": 5.0, "base_variance": 2.0, "bandwidth": None},
    },
    "regression": {
        "experiment": "regression",
        "seed": 23,
        "replications": 500,
        "threads": 1,
        "sweep": {"log10_c_min": -2.0, "log10_c_max": 1.0, "points": 8},
        "check": {"rep_size": None},
        "regression": {"n_obs": 50, "n_covariates": 100, "p_bootstrap_p": 0.632, "cv_m": None},
    },
    "lda": {
        "experiment": "lda",
        "seed": 7,
        "replications": 200,
        "threads": 1,
        "sweep": {"topic_grid": [2, 5, 10, 25, 50]},
        "check": {},
        "lda": {
            "corpus_path": None,
            "n_docs": 200,
            "vocab_size": 200,
            "true_topics": 5,
            "doc_length": 64,
            "eta": 0.1,
            "alpha_dir": 0.1,
            "gen_eta": None,
            "gen_alpha": None,
            "fit_sweeps": 100,
            "chain_burn_in": 30,
            "chain_thin": 2,
            "heldout_docs": 40,
            "heldout_mode": "conditioned",
            "split_fraction": 0.5,
            "deviance": "topic_mi",
            "max_groups": None,
        },
    },
    "custom": {
        "experiment": "custom",
        "seed": 1,
        "replications": 100,
        "threads": 1,
        "check": {"type": "ppc", "rep_size": None, "scheme": None},
        "model": {"name": "dp", "alpha": 1.0, "base_mean": 5.0, "base_variance": 2.0,
                  "bandwidth": None, "prior_variance": 1.0},
        "discrepancy": "mean",
        "distance": "indicator",
        "data": {"kind": "normal", "n": 20, "mean": 5.0, "variance": 2.0},
        "population": None,
    },
}


def default_config(experiment: str) -> dict:
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}; valid: {EXPERIMENTS}")
    return copy.deepcopy(_DEFAULTS[experiment])


def _merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment configuration (defaults merged with user input)."""

    raw: dict

    @staticmethod
    def build(experiment: str, user: dict | None = None, *, seed=None,
              replications=None, threads=None) -> "ExperimentConfig":
        user = user or {}
        declared = user.get("experiment", experiment)
        if declared != experiment:
            raise ConfigError(
                f"config declares experiment {declared!r} but {experiment!r} was requested"
            )
        cfg = _merge(default_config(experiment), user)
        if seed is not None:
            cfg["seed"] = seed
        if replications is not None:
            cfg["replications"] = replications
        if threads is not None:
            cfg["threads"] = threads
        ExperimentConfig._validate(cfg)
        return ExperimentConfig(raw=cfg)

    @staticmethod
    def _validate(cfg: dict) -> None:
        exp = cfg["experiment"]
        if not isinstance(cfg["seed"], int) or cfg["seed"] < 0:
            raise ConfigError("seed must be a nonnegative integer")
        if not isinstance(cfg["replications"], int) or cfg["replications"] < 1:
            raise ConfigError("replications must be a positive integer")
        if not isinstance(cfg["threads"], int) or cfg["threads"] < 1:
            raise ConfigError("threads must be a positive integer")
        if exp == "dp":
            sweep = cfg["sweep"]
            if sweep.get("points", 0) < 1:
                raise ConfigError("alpha grid needs at least one point")
            if np.exp(sweep["log_alpha_min"]) < 0:
                raise ConfigError("alpha must be nonnegative")
            if cfg["dp"]["n_obs"] < 1:
                raise ConfigError("n_obs must be positive")
            if cfg["dp"]["base_variance"] <= 0:
                raise ConfigError("base_variance must be positive")
        elif exp == "regression":
            if cfg["sweep"].get("points", 0) < 1:
                raise ConfigError("prior variance grid needs at least one point")
            reg = cfg["regression"]
            if reg["n_obs"] < 2 or reg["n_covariates"] < 1:
                raise ConfigError("need n_obs >= 2 and n_covariates >= 1")
            if not 0.0 <= reg["p_bootstrap_p"] <= 1.0:
                raise ConfigError("p_bootstrap_p must be in [0, 1]")
        elif exp == "lda":
            grid = cfg["sweep"].get("topic_grid", [])
            if not grid or any(int(k) < 1 for k in grid):
                raise ConfigError("topic_grid must list integers >= 1")
            lda = cfg["lda"]
            if lda["eta"] <= 0 or lda["alpha_dir"] <= 0:
                raise ConfigError("eta and alpha_dir must be positive")
            if lda["corpus_path"] is None:
                if lda["n_docs"] < 2 or lda["vocab_size"] < 2 or lda["doc_length"] < 4:
                    raise ConfigError("synthetic corpus needs n_docs, vocab_size, doc_length")
                if lda["true_topics"] < 1:
                    raise ConfigError("true_topics must be >= 1")
            if not 0.0 < lda["split_fraction"] < 1.0:
                raise ConfigError("split_fraction must be in (0, 1)")
            if lda["heldout_mode"] not in ("prior", "conditioned"):
                raise ConfigError("heldout_mode must be 'prior' or 'conditioned'")
            if lda["deviance"] not in ("topic_mi", "imi_mean"):
                raise ConfigError("deviance must be 'topic_mi' or 'imi_mean'")
        elif exp == "custom":
            check = cfg["check"]
            if check["type"] not in CUSTOM_CHECKS:
                raise ConfigError(
                    f"unknown check type {check['type']!r}; valid: {CUSTOM_CHECKS}"
                )
            if cfg["model"]["name"] not in CUSTOM_MODELS:
                raise ConfigError(
                    f"unknown model {cfg['model']['name']!r}; valid: {CUSTOM_MODELS}"
                )
            if cfg["discrepancy"] not in CUSTOM_DISCREPANCIES:
                raise ConfigError(
                    f"unknown discrepancy {cfg['discrepancy']!r}; valid: {CUSTOM_DISCREPANCIES}"
                )
            if cfg["distance"] not in DISTANCES:
                raise ConfigError(
                    f"unknown distance {cfg['distance']!r}; valid: {DISTANCES}"
                )
            data = cfg["data"]
            if data.get("kind") not in CUSTOM_DATA:
                raise ConfigError(
                    f"unknown data kind {data.get('kind')!r}; valid: {CUSTOM_DATA}"
                )
            if check["type"] == "popc_estimated":
                scheme = check.get("scheme")
                if not scheme or scheme.get("kind") not in SplitScheme.KINDS:
                    raise ConfigError(
                        f"popc_estimated needs check.scheme.kind in {SplitScheme.KINDS}"
                    )

    def __getitem__(self, key):
        return self.raw[key]


def _run_grid(points, worker, threads: int):
    """Evaluate ``worker`` over grid points, in order, on ``threads`` workers."""
    if threads <= 1:
        return [worker(i, p) for i, p in enumerate(points)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda args: worker(*args), enumerate(points)))


# ---------------------------------------------------------------------------
# DP experiment
# ---------------------------------------------------------------------------


def run_dp_experiment(config: ExperimentConfig) -> list[dict]:
    cfg = config.raw
    dp_cfg = cfg["dp"]
    seed = cfg["seed"]
    base = Normal(dp_cfg["base_mean"], np.sqrt(dp_cfg["base_variance"]))
    data_rng = substream(seed, 0)
    y_obs = Dataset.from_scalars(base.rvs(size=dp_cfg["n_obs"], random_state=data_rng))

    sweep = cfg["sweep"]
    alphas = np.exp(np.linspace(sweep["log_alpha_min"], sweep["log_alpha_max"],
                                sweep["points"]))
    rep_size = cfg["check"].get("rep_size") or dp_cfg["n_obs"]
    d = log_predictive_discrepancy()

    def population(size, rng):
        return Dataset.from_scalars(base.rvs(size=size, random_state=rng))

    def point(i, alpha):
        model = DPModel(alpha, base=base, bandwidth=dp_cfg["bandwidth"])
        ppc = run_ppc(
            model, y_obs, d, indicator(),
            CheckConfig(cfg["replications"], derive_seed(seed, 1, i), rep_size=rep_size),
        )
        popc = run_popc_ideal(
            model, y_obs, population, d, indicator(),
            CheckConfig(cfg["replications"], derive_seed(seed, 2, i), rep_size=rep_size),
        )
        # Report the population p-value on its lower tail, P(d_rep <= d_new),
        # so that an overfit predictive (replications scoring above fresh
        # population draws) reads as an extreme value near zero.
        return {
            "alpha": float(alpha),
            "log_alpha": float(np.log(alpha)),
            "ppc_pvalue": ppc.estimate,
            "ppc_se": ppc.std_error,
            "popc_pvalue": 1.0 - popc.estimate,
            "popc_se": popc.std_error,
        }

    return _run_grid(alphas, point, cfg["threads"])


def cmd_dp(config: ExperimentConfig, out_dir) -> list[Path]:
    rows = run_dp_experiment(config)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "dp.csv"
    write_csv(
        csv_path,
        ["alpha", "log_alpha", "ppc_pvalue", "ppc_se", "popc_pvalue", "popc_se"],
        [[r[k] for k in ("alpha", "log_alpha", "ppc_pvalue", "ppc_se",
                         "popc_pvalue", "popc_se")] for r in rows],
    )
    from .plots import render_dp_figure

    fig_path = out_dir / "dp.png"
    render_dp_figure(rows, fig_path)
    return [csv_path, fig_path]


# ---------------------------------------------------------------------------
# Regression experiment
# ---------------------------------------------------------------------------

REGRESSION_METHODS = ("ppc", "popc_ideal", "popc_cv", "popc_oob",
                      "popc_double_bootstrap", "popc_p632")


def run_regression_experiment(config: ExperimentConfig) -> list[dict]:
    cfg = config.raw
    reg = cfg["regression"]
    seed = cfg["seed"]
    n, p = reg["n_obs"], reg["n_covariates"]
    X, y, theta_true = simulate_regression_data(n, p, rng=substream(seed, 0))
    pool = Dataset.from_regression(X, y)

    sweep = cfg["sweep"]
    cs = np.logspace(sweep["log10_c_min"], sweep["log10_c_max"], sweep["points"])
    d = mse_discrepancy()
    g = absolute()
    R = cfg["replications"]
    rep_size = cfg["check"].get("rep_size") or n

    def population(size, rng):
        Xn = rng.random((size, p))
        yn = Xn @ theta_true + rng.standard_normal(size)
        return Dataset.from_regression(Xn, yn)

    schemes = [
        ("popc_cv", SplitScheme("cv", m=reg["cv_m"])),
        ("popc_oob", SplitScheme("oob")),
        ("popc_double_bootstrap", SplitScheme("double_bootstrap")),
        ("popc_p632", SplitScheme("p_bootstrap", p=reg["p_bootstrap_p"])),
    ]

    def point(i, c):
        model = BLRModel(c=float(c), p=p)
        out = []
        ppc = run_ppc(model, pool, d, g,
                      CheckConfig(R, derive_seed(seed, 1, i), rep_size=rep_size))
        out.append(("ppc", ppc))
        ideal = run_popc_ideal(model, pool, population, d, g,
                               CheckConfig(R, derive_seed(seed, 2, i), rep_size=rep_size))
        out.append(("popc_ideal", ideal))
        for j, (label, scheme) in enumerate(schemes):
            res = run_popc_estimated(model, pool, scheme, d, g,
                                     CheckConfig(R, derive_seed(seed, 3 + j, i)))
            out.append((label, res))
        return [
            {"log_c": float(np.log(c)), "method": label,
             "value": res.estimate, "se": res.std_error}
            for label, res in out
        ]

    nested = _run_grid(cs, point, cfg["threads"])
    return [row for rows in nested for row in rows]


def cmd_regression(config: ExperimentConfig, out_dir) -> list[Path]:
    rows = run_regression_experiment(config)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "regression.csv"
    write_csv(csv_path, ["log_c", "method", "value", "se"],
              [[r["log_c"], r["method"], r["value"], r["se"]] for r in rows])
    from .plots import render_regression_figure

    fig_path = out_dir / "regression.png"
    render_regression_figure(rows, fig_path)
    return [csv_path, fig_path]


# ---------------------------------------------------------------------------
# LDA experiment
# ---------------------------------------------------------------------------


def _synthetic_corpus(lda_cfg: dict, rng) -> Dataset:
    K_true, V, D = lda_cfg["true_topics"], lda_cfg["vocab_size"], lda_cfg["n_docs"]
    gen_eta = lda_cfg["gen_eta"] if lda_cfg["gen_eta"] is not None else lda_cfg["eta"]
    gen_alpha = lda_cfg["gen_alpha"] if lda_cfg["gen_alpha"] is not None else lda_cfg["alpha_dir"]
    topics = rng.gamma(gen_eta, size=(K_true, V))
    topics /= topics.sum(axis=1, keepdims=True)
    props = rng.gamma(gen_alpha, size=(D, K_true))
    props /= props.sum(axis=1, keepdims=True)
    lengths = np.full(D, lda_cfg["doc_length"])
    doc_ids, word_ids, _ = generate_corpus(topics, props, lengths, rng)
    return Dataset.from_tokens(doc_ids, word_ids, n_docs=D, vocab_size=V)


@dataclass
class _LdaLayout:
    """Fixed data layout shared by every K of the sweep.

    Held-out documents never enter the topic fit.  Depending on the
    ``heldout_mode`` they are referenced either whole with prior locals
    (``"prior"``) or split like fit documents, conditioning their locals on
    the first half (``"conditioned"``).
    """

    fit_labels: np.ndarray           # documents whose first halves fit the topics
    heldout_labels: np.ndarray       # documents excluded from fitting entirely
    fit_corpus: Dataset              # pooled observed halves of the fit documents
    obs_parts: list[Dataset]         # per fit doc: observed half
    new_parts: list[Dataset]         # per fit doc: held-out half
    heldout_obs_parts: list[Dataset]   # per held-out doc: conditioning part (may be empty)
    heldout_ref_parts: list[Dataset]   # per held-out doc: reference part
    heldout_mode: str
    n_docs: int
    vocab_size: int


def _lda_layout(corpus: Dataset, lda_cfg: dict, rng) -> _LdaLayout:
    labels = corpus.group_labels()
    n_heldout = min(lda_cfg["heldout_docs"], max(len(labels) - 2, 0))
    heldout_labels = np.sort(rng.choice(labels, size=n_heldout, replace=False))
    heldout_set = set(heldout_labels.tolist())
    fit_labels = np.array([g for g in labels if g not in heldout_set])
    if lda_cfg["max_groups"] is not None and len(fit_labels) > lda_cfg["max_groups"]:
        fit_labels = np.sort(rng.choice(fit_labels, size=lda_cfg["max_groups"],
                                        replace=False))

    obs_parts, new_parts = [], []
    for g in fit_labels:
        split = within_group_split(corpus.group(g), lda_cfg["split_fraction"], rng,
                                   label=g)
        obs_parts.append(split.y_obs)
        new_parts.append(split.y_new)

    mode = lda_cfg["heldout_mode"]
    heldout_obs_parts, heldout_ref_parts = [], []
    for g in heldout_labels:
        doc = corpus.group(g)
        if mode == "prior":
            heldout_obs_parts.append(doc.take([]))
            heldout_ref_parts.append(doc)
        else:
            split = within_group_split(doc, lda_cfg["split_fraction"], rng, label=g)
            heldout_obs_parts.append(split.y_obs)
            heldout_ref_parts.append(split.y_new)

    fit_corpus = Dataset.from_tokens(
        np.concatenate([part.doc_ids for part in obs_parts]),
        np.concatenate([part.word_ids for part in obs_parts]),
        n_docs=corpus.n_docs,
        vocab_size=corpus.vocab_size,
    )
    return _LdaLayout(fit_labels, heldout_labels, fit_corpus, obs_parts, new_parts,
                      heldout_obs_parts, heldout_ref_parts, mode,
                      corpus.n_docs, corpus.vocab_size)


def _concat_tokens(parts: list[Dataset], n_docs: int, vocab_size: int) -> Dataset:
    return Dataset.from_tokens(
        np.concatenate([p.doc_ids for p in parts]),
        np.concatenate([p.word_ids for p in parts]),
        n_docs=n_docs,
        vocab_size=vocab_size,
    )


def _per_topic_deviance(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Mean |a - b| per topic over componentwise jointly defined words."""
    diff = np.abs(a - b)
    defined = np.isfinite(diff)
    with np.errstate(invalid="ignore"):
        sums = np.where(defined, diff, 0.0).sum(axis=1)
        counts = defined.sum(axis=1)
    out = np.full(a.shape[0], np.nan)
    nonzero = counts > 0
    out[nonzero] = sums[nonzero] / counts[nonzero]
    return out


def _topic_counts(corpus: Dataset, assignments: np.ndarray, K: int, V: int) -> np.ndarray:
    counts = np.zeros((K, V))
    np.add.at(counts, (assignments, corpus.word_ids), 1.0)
    return counts


def _joint_topic_mi_deviance(imi_a: np.ndarray, counts_a: np.ndarray,
                             imi_b: np.ndarray, counts_b: np.ndarray) -> np.ndarray:
    """Per-topic |difference| of count-weighted IMI over the common support.

    Each side's weighted mean (its within-topic word/document mutual
    information) is restricted to the words defined in both corpora and
    renormalized, so words unique to one corpus cannot masquerade as signal.
    Topics with no common support are NaN.
    """
    joint = np.isfinite(imi_a) & np.isfinite(imi_b)
    out = np.full(imi_a.shape[0], np.nan)
    for k in np.flatnonzero(joint.any(axis=1)):
        sel = joint[k]
        wa = counts_a[k, sel]
        wb = counts_b[k, sel]
        if wa.sum() == 0 or wb.sum() == 0:
            continue
        mi_a = float(wa @ imi_a[k, sel] / wa.sum())
        mi_b = float(wb @ imi_b[k, sel] / wb.sum())
        out[k] = abs(mi_a - mi_b)
    return out


def _lda_deviance_check(layout: _LdaLayout, topics: np.ndarray, alpha_dir: float,
                        reference: str, include_heldout: bool, R: int, seed: int,
                        chain_burn_in: int, chain_thin: int,
                        deviance: str = "topic_mi",
                        rep_locals: str = "prior") -> dict:
    """Average per-topic IMI deviance between replicated and reference corpora.

    ``reference`` picks the data paired with the posterior locals of each fit
    document: its observed half (``"obs"``, the posterior check) or its
    held-out half (``"new"``, the population check).  Held-out documents,
    included only in the population check, enter as groups the model never
    fit; their locals follow the layout's held-out mode.

    ``rep_locals`` sets the law of the locals behind the replicated corpora:
    ``"prior"`` (population check: replicated groups are what the model
    claims fresh groups look like) or ``"posterior"`` (classical posterior
    predictive: the same per-replication local draw generates the replicated
    group and evaluates the reference, reusing one latent state on both
    sides).

    ``deviance`` selects the per-topic scalar: ``"topic_mi"`` compares the
    count-weighted IMI (within-topic word/document mutual information) of the
    two corpora, ``"imi_mean"`` the plain componentwise mean |difference| over
    jointly defined words.
    """
    K = topics.shape[0]
    V = layout.vocab_size
    ref_parts = layout.obs_parts if reference == "obs" else layout.new_parts
    parts = list(ref_parts)
    cond_parts = list(layout.obs_parts)
    if include_heldout:
        parts += layout.heldout_ref_parts
        if layout.heldout_mode == "conditioned":
            cond_parts += layout.heldout_obs_parts
    ref_corpus = _concat_tokens(parts, layout.n_docs, V)
    lengths = np.array([len(p) for p in parts])
    part_labels = [int(p.doc_ids[0]) for p in parts]
    rep_doc_ids = np.repeat(part_labels, lengths)
    n_groups = len(parts)
    n_fit = len(layout.fit_labels)

    # one blocked-Gibbs chain over every conditioning part provides the
    # per-replication posterior locals; its rows follow sorted group labels
    cond_corpus = _concat_tokens(cond_parts, layout.n_docs, V)
    chain_rng = substream(seed, 1)
    z_draws, t_draws = local_posterior_draws(
        cond_corpus, topics, alpha_dir,
        n_draws=R, burn_in=chain_burn_in, thin=chain_thin, rng=chain_rng,
    )
    chain_row = {int(g): i for i, g in enumerate(sorted(cond_corpus.group_labels()))}
    part_chain_rows = np.array([chain_row.get(g, -1) for g in part_labels])
    ref_doc_idx_in_parts = np.repeat(np.arange(n_groups), lengths)
    n_obs_tokens = sum(len(p) for p in layout.obs_parts)

    streams = CounterStreams(seed)
    per_topic_sum = np.zeros(K)
    per_topic_count = np.zeros(K)
    overall = np.empty(R)
    for r in range(R):
        rng = streams.replication(r)
        # reference-side locals: posterior where conditioning data exist,
        # prior for held-out groups without any
        z_ref = np.empty((n_groups, K))
        known = part_chain_rows >= 0
        z_ref[known] = z_draws[r][part_chain_rows[known]]
        if not known.all():
            z_extra = rng.gamma(alpha_dir, size=((~known).sum(), K))
            z_ref[~known] = z_extra / z_extra.sum(axis=1, keepdims=True)

        # replicated side, sized like the reference
        if rep_locals == "posterior":
            z_rep = z_ref  # one latent draw shared by both sides
        else:
            z_rep = rng.gamma(alpha_dir, size=(n_groups, K))
            z_rep /= z_rep.sum(axis=1, keepdims=True)
        _, gen_words, gen_topics = generate_corpus(topics, z_rep, lengths, rng)
        rep_corpus = Dataset.from_tokens(rep_doc_ids, gen_words,
                                         n_docs=layout.n_docs, vocab_size=V)
        imi_rep = imi_d(rep_corpus, gen_topics, K, vocab_size=V)

        if reference == "obs" and not include_heldout:
            # the chain's own assignments of the observed halves
            ref_assign = t_draws[r][:n_obs_tokens]
        else:
            ref_assign = sample_assignments(ref_corpus, z_ref,
                                            ref_doc_idx_in_parts, topics, rng)
        imi_ref = imi_d(ref_corpus, ref_assign, K, vocab_size=V)

        if deviance == "topic_mi":
            dev = _joint_topic_mi_deviance(
                imi_rep.values, _topic_counts(rep_corpus, gen_topics, K, V),
                imi_ref.values, _topic_counts(ref_corpus, ref_assign, K, V),
            )
        else:
            dev = _per_topic_deviance(imi_rep.values, imi_ref.values)
        defined = np.isfinite(dev)
        per_topic_sum[defined] += dev[defined]
        per_topic_count[defined] += 1
        overall[r] = float(np.mean(dev[defined])) if defined.any() else np.nan

    per_topic = np.full(K, np.nan)
    ok = per_topic_count > 0
    per_topic[ok] = per_topic_sum[ok] / per_topic_count[ok]
    return {
        "deviance": float(np.nanmean(overall)),
        "se": float(np.nanstd(overall, ddof=1) / np.sqrt(R)),
        "per_topic": per_topic,
    }


def run_lda_experiment(config: ExperimentConfig) -> list[dict]:
    cfg = config.raw
    lda_cfg = cfg["lda"]
    seed = cfg["seed"]
    data_rng = substream(seed, 0)
    if lda_cfg["corpus_path"] is not None:
        corpus = load_corpus_tsv(lda_cfg["corpus_path"])
    else:
        corpus = _synthetic_corpus(lda_cfg, data_rng)
    layout = _lda_layout(corpus, lda_cfg, data_rng)
    R = cfg["replications"]

    def point(i, K):
        K = int(K)
        state = lda_gibbs_fit(layout.fit_corpus, K, lda_cfg["eta"], lda_cfg["alpha_dir"],
                              sweeps=lda_cfg["fit_sweeps"], rng=substream(seed, 1, i))
        common = dict(chain_burn_in=lda_cfg["chain_burn_in"],
                      chain_thin=lda_cfg["chain_thin"], deviance=lda_cfg["deviance"])
        # both checks condition on the fitted structure (topics plus the
        # per-replication posterior locals) and share that state between the
        # replicated and reference sides; they differ only in the reference
        # data, the observed halves for the posterior check and held-out
        # data for the population check
        ppc = _lda_deviance_check(
            layout, state.topics, lda_cfg["alpha_dir"], reference="obs",
            include_heldout=False, R=R, seed=derive_seed(seed, 2, i),
            rep_locals="posterior", **common,
        )
        popc = _lda_deviance_check(
            layout, state.topics, lda_cfg["alpha_dir"], reference="new",
            include_heldout=True, R=R, seed=derive_seed(seed, 3, i),
            rep_locals="posterior", **common,
        )
        return {
            "K": K,
            "ppc_deviance": ppc["deviance"],
            "popc_deviance": popc["deviance"],
            "ratio": popc["deviance"] / ppc["deviance"],
            "per_topic_min_deviance": float(np.nanmin(popc["per_topic"])),
        }

    return _run_grid(cfg["sweep"]["topic_grid"], point, cfg["threads"])


def cmd_lda(config: ExperimentConfig, out_dir) -> list[Path]:
    rows = run_lda_experiment(config)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "lda.csv"
    write_csv(
        csv_path,
        ["K", "ppc_deviance", "popc_deviance", "ratio", "per_topic_min_deviance"],
        [[r["K"], r["ppc_deviance"], r["popc_deviance"], r["ratio"],
          r["per_topic_min_deviance"]] for r in rows],
    )
    from .plots import render_lda_figure

    fig_path = out_dir / "lda.png"
    render_lda_figure(rows, fig_path)
    return [csv_path, fig_path]


# ---------------------------------------------------------------------------
# Custom checks
# ---------------------------------------------------------------------------


def _custom_data(spec: dict, rng) -> Dataset:
    kind = spec["kind"]
    if kind == "normal":
        sd = np.sqrt(spec.get("variance", 1.0))
        return Dataset.from_scalars(spec.get("mean", 0.0) + sd * rng.standard_normal(spec["n"]))
    if kind == "inline_scalars":
        return Dataset.from_scalars(spec["values"])
    if kind == "simulate_regression":
        X, y, _ = simulate_regression_data(spec.get("n", 50), spec.get("p", 100), rng=rng)
        return Dataset.from_regression(X, y)
    if kind == "regression_csv":
        return load_regression_csv(spec["path"])
    if kind == "corpus_tsv":
        return load_corpus_tsv(spec["path"])
    raise ConfigError(f"unknown data kind {kind!r}; valid: {CUSTOM_DATA}")


def _custom_model(spec: dict):
    if spec["name"] == "dp":
        return DPModel(spec["alpha"], base=Normal(spec["base_mean"], np.sqrt(spec["base_variance"])),
                       bandwidth=spec.get("bandwidth"))
    return None  # blr: built once the data dimension is known


def _custom_discrepancy(name: str) -> Discrepancy:
    if name == "mean":
        return mean_discrepancy()
    if name == "log_predictive":
        return log_predictive_discrepancy()
    return mse_discrepancy()


def run_custom(config: ExperimentConfig) -> tuple[CheckResult, dict]:
    cfg = config.raw
    seed = cfg["seed"]
    data = _custom_data(cfg["data"], substream(seed, 0))
    model_name = cfg["model"]["name"]
    if model_name == "dp" and data.kind != "scalar":
        raise ConfigError("the dp model needs scalar data")
    if model_name == "blr" and data.kind != "regression":
        raise ConfigError("the blr model needs regression data")
    if cfg["discrepancy"] == "mean" and data.kind != "scalar":
        raise ConfigError("the mean discrepancy needs scalar data")
    if cfg["discrepancy"] == "mse" and data.kind != "regression":
        raise ConfigError("the mse discrepancy needs regression data")
    if cfg["discrepancy"] == "log_predictive" and model_name != "dp":
        raise ConfigError("the log_predictive discrepancy needs the dp model")
    model = _custom_model(cfg["model"])
    if model is None:
        model = BLRModel(c=cfg["model"]["prior_variance"], p=data.X.shape[1])
    d = _custom_discrepancy(cfg["discrepancy"])
    g = indicator() if cfg["distance"] == "indicator" else absolute()
    check = cfg["check"]
    check_cfg = CheckConfig(cfg["replications"], derive_seed(seed, 1),
                            rep_size=check.get("rep_size"))

    kind = check["type"]
    if kind == "ppc":
        result = run_ppc(model, data, d, g, check_cfg)
    elif kind == "prior_pc":
        result = run_prior_pc(model, data, d, g, check_cfg)
    elif kind == "popc_ideal":
        pop_spec = cfg.get("population") or cfg["data"]
        if pop_spec["kind"] != "normal":
            raise ConfigError("popc_ideal needs a generative population spec (kind 'normal')")

        def population(size, rng):
            spec = dict(pop_spec)
            spec["n"] = size
            return _custom_data(spec, rng)

        result = run_popc_ideal(model, data, population, d, g, check_cfg)
    else:
        scheme_spec = check["scheme"]
        scheme = SplitScheme(
            kind=scheme_spec["kind"],
            m=scheme_spec.get("m"),
            p=scheme_spec.get("p"),
            unit=scheme_spec.get("unit", "point"),
        )
        result = run_popc_estimated(model, data, scheme, d, g, check_cfg)
    return result, summarize(result)


def cmd_custom(config: ExperimentConfig, out_dir) -> list[Path]:
    result, summary = run_custom(config)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path = out_dir / "result.json"
    write_json(json_path, {
        "config": config.raw,
        "estimate": result.estimate,
        "std_error": result.std_error,
        "metadata": {k: v for k, v in result.metadata.items()},
        "summary": summary,
    })
    trace_path = out_dir / "trace.csv"
    write_csv(trace_path, ["replication", "value"],
              [[r, v] for r, v in enumerate(result.per_rep_values)])
    return [json_path, trace_path]

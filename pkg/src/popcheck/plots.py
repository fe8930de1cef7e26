"""Figure rendering for the experiment reports.

Every report writes a PNG next to its CSV.  Figures are rendered headlessly
and with fixed metadata so reruns produce byte-identical files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["render_dp_figure", "render_regression_figure", "render_lda_figure"]

_SAVE_OPTS = {"dpi": 150, "metadata": {"Software": "popcheck"}}


def _new_axes(title: str, xlabel: str, ylabel: str):
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    return fig, ax


def render_dp_figure(rows: list[dict], path) -> None:
    x = np.array([r["log_alpha"] for r in rows])
    fig, ax = _new_axes("Predictive p-values, Dirichlet-process model",
                        "log concentration", "p-value")
    for key, se_key, label, color in (
        ("ppc_pvalue", "ppc_se", "posterior predictive", "tab:blue"),
        ("popc_pvalue", "popc_se", "population predictive (ideal)", "tab:red"),
    ):
        v = np.array([r[key] for r in rows])
        se = np.array([r[se_key] for r in rows])
        ax.plot(x, v, label=label, color=color)
        ax.fill_between(x, v - 2 * se, v + 2 * se, color=color, alpha=0.2, linewidth=0)
    ax.axhline(0.5, color="gray", linestyle=":", linewidth=1)
    ax.set_ylim(-0.02, 1.02)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, **_SAVE_OPTS)
    plt.close(fig)


_METHOD_STYLE = {
    "ppc": ("posterior predictive", "tab:blue", "-"),
    "popc_ideal": ("population (ideal)", "black", "-"),
    "popc_cv": ("cross-validation", "tab:orange", "--"),
    "popc_oob": ("out-of-bag", "tab:green", "--"),
    "popc_double_bootstrap": ("double bootstrap", "tab:purple", "--"),
    "popc_p632": ("632 bootstrap", "tab:red", "--"),
}


def render_regression_figure(rows: list[dict], path) -> None:
    fig, ax = _new_axes("Mean-squared-error checks, Bayesian linear regression",
                        "log prior variance", "check value")
    methods = {}
    for r in rows:
        methods.setdefault(r["method"], []).append((r["log_c"], r["value"]))
    for method, pts in methods.items():
        pts = sorted(pts)
        label, color, style = _METHOD_STYLE.get(method, (method, None, "-"))
        ax.plot([p[0] for p in pts], [p[1] for p in pts], style, color=color,
                label=label, linewidth=1.8 if method == "popc_ideal" else 1.3)
    ax.set_yscale("log")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_OPTS)
    plt.close(fig)


def render_lda_figure(rows: list[dict], path) -> None:
    ks = np.array([r["K"] for r in rows])
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.5, 4.0))
    ax1.plot(ks, [r["ppc_deviance"] for r in rows], "o-", color="tab:blue",
             label="posterior predictive")
    ax1.plot(ks, [r["popc_deviance"] for r in rows], "o-", color="tab:red",
             label="population predictive")
    ax1.set_xscale("log")
    ax1.set_yscale("log")
    ax1.set_xlabel("topics")
    ax1.set_ylabel("IMI deviance")
    ax1.grid(True, alpha=0.3)
    ax1.legend(fontsize=8)
    ax2.plot(ks, [r["ratio"] for r in rows], "o-", color="black")
    ax2.axhline(1.0, color="gray", linestyle=":", linewidth=1)
    ax2.set_xscale("log")
    ax2.set_xlabel("topics")
    ax2.set_ylabel("deviance ratio (population / posterior)")
    ax2.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_OPTS)
    plt.close(fig)

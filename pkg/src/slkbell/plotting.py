"""Figures for the CLI report paths, written straight to files.

Everything renders with the Agg backend; nothing is shown interactively.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .functional import bell_weights, lr_bound, slope  # noqa: E402

COLORS = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)

STYLE = {
    "font.size": 11,
    "axes.linewidth": 1.2,
    "axes.prop_cycle": matplotlib.cycler(color=COLORS),
    "legend.frameon": False,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
}


def _save(fig, path) -> None:
    # drop the version stamp so reruns give identical files
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)


def relation_figure(rows: Sequence[dict], path) -> None:
    """Bell value against concurrence, one colour per dimension.

    Dots are sampled states; solid lines are ``2 sqrt2 (d-1) C``; dashed
    horizontal lines mark the local-realistic bound.
    """
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6, 4.5))
        ds = sorted({int(r["d"]) for r in rows})
        c = np.linspace(0, 1, 2)
        for i, d in enumerate(ds):
            color = COLORS[i % len(COLORS)]
            pts = [r for r in rows if int(r["d"]) == d]
            ax.plot([r["concurrence"] for r in pts], [r["i_slk"] for r in pts], ".", color=color, ms=3)
            ax.plot(c, slope(d) * c, "-", color=color, lw=1, label=f"d = {d}")
            ax.axhline(lr_bound(d), color=color, ls="--", lw=0.8)
        ax.set_xlabel("concurrence")
        ax.set_ylabel("Bell-SLK value")
        ax.set_xlim(0, 1)
        ax.legend(loc="upper left")
        _save(fig, path)


def identities_figure(reports: Iterable, path) -> None:
    """Error-to-tolerance ratio of every evaluated identity check."""
    reports = [r for r in reports if not r.skipped]
    names = sorted({r.name for r in reports})
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(7, 4))
        for i, name in enumerate(names):
            ratios = np.array([r.abs_error / r.tolerance for r in reports if r.name == name])
            ratios = np.maximum(ratios, 1e-12)
            x = i + np.linspace(-0.3, 0.3, len(ratios))
            ax.plot(x, ratios, ".", ms=2, color=COLORS[i % len(COLORS)])
        ax.axhline(1.0, color="k", lw=1)
        ax.set_yscale("log")
        ax.set_xticks(range(len(names)))
        ax.set_xticklabels(names, rotation=30, ha="right")
        ax.set_ylabel("|lhs - rhs| / tolerance")
        _save(fig, path)


def trace_figure(result, path) -> None:
    values = np.array([v for _, v in result.trace or []])
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6, 4))
        if len(values):
            ax.plot(values, ",", color=COLORS[7], alpha=0.5)
            ax.plot(np.maximum.accumulate(values), "-", color=COLORS[0], label="best so far")
        ax.axhline(result.canonical_value, color=COLORS[3], ls="--", label="canonical offsets")
        ax.set_xlabel("evaluation")
        ax.set_ylabel("Bell-SLK value")
        ax.legend(loc="lower right")
        _save(fig, path)


def weights_figure(d: int, path) -> None:
    f = bell_weights(d).f
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        ax.stem(np.arange(d), f)
        ax.axhline(0, color="k", lw=0.8)
        ax.set_xlabel(r"$\alpha$")
        ax.set_ylabel(r"$f(\alpha)$")
        _save(fig, path)

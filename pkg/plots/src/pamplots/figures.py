"""Deterministic figure builders for the four supported plot kinds.

Rendering is pure: a fixed style, no timestamps or hashes, so the same CSV
input produces byte-identical image files across runs.
"""

from __future__ import annotations

from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .csvio import SchemaError, read_tables  # noqa: E402

__all__ = ["PlotSpec", "build_figure", "render", "FIGURE_KINDS"]

_STYLE = {
    "figure.figsize": (7.0, 4.5),
    "figure.dpi": 110,
    "savefig.dpi": 110,
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "svg.hashsalt": "pamplots",
}

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b",
           "#e377c2", "#7f7f7f")


@dataclass
class PlotSpec:
    """What to draw: input CSV path(s), figure kind, output image path."""

    csv_paths: tuple
    kind: str
    output: str

    def __post_init__(self):
        if isinstance(self.csv_paths, (str, bytes)):
            self.csv_paths = (self.csv_paths,)
        self.csv_paths = tuple(self.csv_paths)
        if self.kind not in FIGURE_KINDS:
            raise ValueError(
                f"unknown figure kind {self.kind!r}; "
                f"expected one of {sorted(FIGURE_KINDS)}"
            )


def _growth_floor(table):
    return table.meta_float("rho") * table.meta_float("gamma")


def _floor_line(ax, level):
    ax.axhline(level, color="black", linestyle="--", linewidth=1.0,
               label=r"$\rho\gamma$ floor")


def _headline_rows(rows):
    """Largest-t row per (kappa, p): the reported finite-time estimate."""
    best = {}
    for row in rows:
        key = (row["kappa"], row["p"])
        if key not in best or row["t"] > best[key]["t"]:
            best[key] = row
    return best


def _draw_lyapunov_vs_kappa(table, ax):
    table.require("kappa", "p", "t", "lambda_hat", "std_error")
    best = _headline_rows(table.rows)
    p_values = sorted({p for (_, p) in best})
    for i, p in enumerate(p_values):
        pts = sorted(
            (k, row["lambda_hat"], row["std_error"])
            for (k, pp), row in best.items() if pp == p
        )
        kappas, lams, errs = zip(*pts)
        label = "quenched (p=0)" if p == 0 else f"moment p={int(p)}"
        ax.errorbar(kappas, lams, yerr=errs, marker="o", capsize=3,
                    color=_COLORS[i % len(_COLORS)], label=label)
    _floor_line(ax, _growth_floor(table))
    ax.set_xlabel(r"diffusion constant $\kappa$")
    ax.set_ylabel(r"growth rate $\hat\lambda$")
    ax.set_title("Growth rate vs diffusion constant")
    ax.legend()


def _draw_lambda_trace(table, ax):
    table.require("kappa", "p", "t", "lambda_hat", "std_error")
    rows = [r for r in table.rows if r["p"] == 0]
    if not rows:
        raise SchemaError("no quenched (p=0) rows to trace")
    kappas = sorted({r["kappa"] for r in rows})
    for i, kappa in enumerate(kappas):
        pts = sorted(
            (r["t"], r["lambda_hat"], r["std_error"])
            for r in rows if r["kappa"] == kappa
        )
        ts, lams, errs = zip(*pts)
        ax.errorbar(ts, lams, yerr=errs, marker="o", capsize=3,
                    color=_COLORS[i % len(_COLORS)],
                    label=rf"$\kappa={kappa:g}$")
    _floor_line(ax, _growth_floor(table))
    ax.set_xlabel(r"time $t$")
    ax.set_ylabel(r"$\hat\Lambda_0(t)$")
    ax.set_title("Finite-time growth-rate convergence")
    ax.legend()


def _draw_correlation_overlay(table, ax):
    table.require("x", "t", "empirical", "std_error", "exact", "z_score")
    rows = sorted(table.rows, key=lambda r: (r["x"], r["t"]))
    pos = np.arange(len(rows))
    emp = [r["empirical"] for r in rows]
    err = [r["std_error"] for r in rows]
    exact = [r["exact"] for r in rows]
    ax.errorbar(pos, emp, yerr=err, fmt="o", capsize=3,
                color=_COLORS[0], label="empirical")
    ax.plot(pos, exact, "_", markersize=16, color=_COLORS[1], label="exact")
    for p, r in zip(pos, rows):
        ax.annotate(
            f"|z|={abs(r['z_score']):.1f}",
            (p, max(r["empirical"] + r["std_error"], r["exact"])),
            textcoords="offset points", xytext=(0, 6),
            ha="center", fontsize=8,
        )
    ax.set_xticks(pos)
    ax.set_xticklabels([f"x={int(r['x'])}\nt={r['t']:g}" for r in rows],
                       fontsize=8)
    ax.set_ylabel("two-point correlation")
    ax.set_title("Empirical vs exact space-time correlations")
    ax.legend()


def _draw_conditions_growth(table, ax):
    table.require("check_name", "T", "empirical", "std_error")
    rows = sorted(
        (r for r in table.rows if r["check_name"] == "E1"),
        key=lambda r: r["T"],
    )
    if not rows:
        raise SchemaError("no E1 rows for growth plot")
    ts = np.array([r["T"] for r in rows])
    vals = np.array([r["empirical"] for r in rows])
    errs = np.array([r["std_error"] for r in rows])
    ax.errorbar(ts, vals, yerr=errs, marker="o", capsize=3,
                color=_COLORS[0], label="first-moment gap")
    ref = vals[0] * np.sqrt(ts / ts[0])
    ax.plot(ts, ref, ":", color="black", label=r"$\propto\sqrt{T}$")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("horizon T")
    ax.set_ylabel("mean |neighbor integral gap|")
    ax.set_title("Fluctuation growth along the horizon grid")
    ax.legend()


FIGURE_KINDS = {
    "lyapunov_vs_kappa": _draw_lyapunov_vs_kappa,
    "lambda_trace": _draw_lambda_trace,
    "correlation_overlay": _draw_correlation_overlay,
    "conditions_growth": _draw_conditions_growth,
}


def build_figure(spec):
    """Build the matplotlib figure for a spec (no file output)."""
    table = read_tables(spec.csv_paths)
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        try:
            FIGURE_KINDS[spec.kind](table, ax)
            fig.tight_layout()
        except Exception:
            plt.close(fig)
            raise
    return fig


def render(spec):
    """Render the figure to spec.output; deterministic byte-for-byte."""
    fig = build_figure(spec)
    try:
        metadata = {}
        if spec.output.endswith(".svg"):
            metadata = {"Date": None}
        # hashsalt (stable SVG element ids) is consulted at save time.
        with plt.rc_context(_STYLE):
            fig.savefig(spec.output, metadata=metadata)
    finally:
        plt.close(fig)
    return spec.output

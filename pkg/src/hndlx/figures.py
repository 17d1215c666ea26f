"""Matplotlib renderers for the CLI report paths.

Each function writes one PNG next to the delimited output and returns the
path. Headless by construction (Agg backend).
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .diagnostics import SignMap, SobolResult, UncertaintyResult
from .model import ModelParams

_DPI = 150


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    fig.savefig(path, dpi=_DPI, bbox_inches="tight")
    plt.close(fig)
    return path


def render_surface(points: list[dict], grid: int, path: str | Path) -> Path:
    """Filled contours of the score over the (V, E) unit square."""
    ieq = np.array([p["ieq"] for p in points]).reshape(grid, grid)
    nodes = np.linspace(0.0, 1.0, grid)
    fig, ax = plt.subplots(figsize=(6, 5))
    mesh = ax.contourf(nodes, nodes, ieq.T, levels=24, cmap="viridis")
    ax.contour(nodes, nodes, ieq.T, levels=8, colors="white", linewidths=0.5, alpha=0.6)
    fig.colorbar(mesh, ax=ax, label="IEQ")
    ax.set_xlabel("V (quantum-vulnerable fraction)")
    ax.set_ylabel("E (operational exposure)")
    ax.set_title("Exposure score surface")
    return _save(fig, path)


def render_elasticity_curves(params: ModelParams, path: str | Path) -> Path:
    """Elasticities against the regime ratio, with the fixed-weight line."""
    r = np.logspace(-3, 3, 400)
    beta = params.a / (1.0 + r)
    gamma = params.b / (1.0 + r)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogx(r, beta, label=r"$\beta(r)$", color="tab:blue")
    ax.semilogx(r, gamma, label=r"$\gamma(r)$", color="tab:orange")
    ax.axhline(params.a, ls="--", color="gray", lw=1,
               label="fixed-weight assumption")
    ax.axhline(params.b, ls="--", color="gray", lw=1)
    ax.axvline(1.0, ls=":", color="black", lw=1)
    ax.text(1.1, params.a * 0.95, "r = 1", fontsize=8)
    ax.set_xlabel("regime ratio r = u / θ")
    ax.set_ylabel("elasticity")
    ax.set_title("Endogenous elasticities across regimes")
    ax.legend(loc="upper right", fontsize=8)
    return _save(fig, path)


def render_sign_map(signmap: SignMap, path: str | Path) -> Path:
    """Diverging heat map of estimated log cross-partials."""
    vmax = float(np.max(np.abs(signmap.values))) or 1.0
    fig, ax = plt.subplots(figsize=(6, 5))
    mesh = ax.pcolormesh(signmap.v_nodes, signmap.e_nodes, signmap.values.T,
                         cmap="RdBu", vmin=-vmax, vmax=vmax, shading="auto")
    ax.set_xscale("log")
    ax.set_yscale("log")
    fig.colorbar(mesh, ax=ax, label="log cross-partial")
    ax.set_xlabel("V")
    ax.set_ylabel("E")
    ax.set_title(f"Sign map (negative fraction {signmap.fraction_negative:.2f})")
    return _save(fig, path)


def render_population(V, E, rho: float | None, path: str | Path,
                      max_points: int = 5000) -> Path:
    """V-E scatter with the sample rank correlation in the title."""
    V = np.asarray(V, dtype=float)
    E = np.asarray(E, dtype=float)
    if len(V) > max_points:
        step = len(V) // max_points
        V, E = V[::step], E[::step]
    fig, ax = plt.subplots(figsize=(5.5, 5))
    ax.scatter(V, E, s=4, alpha=0.25, linewidths=0, color="tab:blue")
    ax.set_xlabel("V")
    ax.set_ylabel("E")
    title = "Population (V, E)"
    if rho is not None:
        title += f", Spearman = {rho:.3f}"
    ax.set_title(title)
    return _save(fig, path)


def render_score_histogram(scores, path: str | Path) -> Path:
    scores = np.asarray(scores, dtype=float)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(scores, bins=min(60, max(10, len(scores) // 20)), color="tab:blue",
            edgecolor="white")
    ax.set_xlabel("IEQ")
    ax.set_ylabel("organizations")
    ax.set_title("Score distribution")
    return _save(fig, path)


def render_sobol(result: SobolResult, path: str | Path) -> Path:
    """Total-effect bars with 2-SE whiskers."""
    x = np.arange(len(result.input_names))
    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.bar(x, result.total_effect,
           yerr=2.0 * np.asarray(result.standard_errors), capsize=4,
           color="tab:blue")
    ax.set_xticks(x, result.input_names)
    ax.set_ylabel("total-effect index")
    ax.set_title(f"Sobol total effects ({result.estimator})")
    return _save(fig, path)


def render_uncertainty(result: UncertaintyResult, path: str | Path) -> Path:
    """Quantile band around the point score."""
    qs = sorted(result.quantiles)
    values = [result.quantiles[q] for q in qs]
    fig, ax = plt.subplots(figsize=(6, 3.2))
    ax.plot(values, [1] * len(values), "|", markersize=18, color="tab:blue")
    for q, v in zip(qs, values):
        ax.annotate(f"q{int(q * 100):02d}", (v, 1.02), fontsize=7,
                    ha="center")
    ax.plot([result.point_score], [1], "o", color="tab:red", label="point score")
    ax.set_yticks([])
    ax.set_xlabel("IEQ")
    ax.set_title(f"Monte Carlo spread over {result.samples} draws")
    ax.legend(loc="upper left", fontsize=8)
    return _save(fig, path)


def render_llr_histogram(d, z: float, path: str | Path) -> Path:
    """Per-observation log-likelihood ratios behind a Vuong statistic."""
    d = np.asarray(d, dtype=float)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(d, bins=60, color="tab:blue", edgecolor="white")
    ax.axvline(0.0, color="black", lw=1)
    ax.axvline(float(np.mean(d)), color="tab:red", lw=1.5, ls="--",
               label=f"mean (z = {z:.2f})")
    ax.set_xlabel("per-observation log-likelihood ratio")
    ax.set_ylabel("count")
    ax.set_title("Vuong comparison")
    ax.legend(fontsize=8)
    return _save(fig, path)

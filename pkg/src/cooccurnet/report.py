"""Render figures from pipeline artifacts.

Reads whatever CSV/JSON artifacts are present in a run directory and
writes the matching matplotlib figures next to them. Rendering is
deterministic: fixed figure geometry, no timestamps, manifest hash
embedded in the PNG metadata.
"""

from __future__ import annotations

import logging
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .corpus import format_month
from .exports import load_network, load_trajectories, read_csv_rows, read_json

log = logging.getLogger(__name__)

DPI = 150


def _save(fig, path: Path, manifest: str) -> Path:
    fig.savefig(path, dpi=DPI, metadata={"manifest": manifest})
    plt.close(fig)
    return path


def _month_ticks(ax, centers):
    years = sorted({c // 12 for c in centers})
    step = max(1, len(years) // 8)
    ticks = [y * 12 for y in years[::step]]
    ax.set_xticks(ticks)
    ax.set_xticklabels([str(t // 12) for t in ticks])


def plot_adjacency(ndir: Path, manifest: str) -> Path | None:
    edges, nodes = ndir / "network_edges.csv", ndir / "network_nodes.json"
    if not (edges.exists() and nodes.exists()):
        return None
    net = load_network(edges, nodes)
    order = np.argsort([c or "" for c in net.vocab.classifications], kind="stable")
    w = net.weights[np.ix_(order, order)]
    fig, ax = plt.subplots(figsize=(6, 5))
    im = ax.imshow(w, cmap="viridis", interpolation="nearest")
    fig.colorbar(im, ax=ax, label="edge weight")
    ax.set_title("Adjacency matrix (topics sorted by classification)")
    ax.set_xlabel("topic")
    ax.set_ylabel("topic")
    return _save(fig, ndir / "fig_adjacency.png", manifest)


def plot_node_metrics(ndir: Path, manifest: str) -> Path | None:
    path = ndir / "metrics.json"
    if not path.exists():
        return None
    payload = read_json(path)
    nodes = payload["nodes"]
    degree = np.array([n["degree"] for n in nodes], dtype=float)
    strength = np.array([n["strength"] for n in nodes])
    betweenness = np.array([n["betweenness"] for n in nodes])
    fig, ax = plt.subplots(figsize=(6, 5))
    ranks = betweenness.argsort().argsort() / max(1, len(betweenness) - 1)
    sc = ax.scatter(degree, strength, c=ranks, cmap="coolwarm_r", s=18)
    fig.colorbar(sc, ax=ax, label="betweenness percentile")
    ax.set_xlabel("degree")
    ax.set_ylabel("strength")
    ax.set_title("Degree, strength, and betweenness")
    return _save(fig, ndir / "fig_betweenness.png", manifest)


def plot_gamma_curve(ndir: Path, manifest: str) -> Path | None:
    path = ndir / "gamma_curve.csv"
    if not path.exists():
        return None
    _, rows = read_csv_rows(path)
    data = np.array([[float(x) for x in row] for row in rows[1:]])
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.errorbar(data[:, 0], data[:, 1], yerr=data[:, 2], fmt="o-", capsize=3)
    ax.set_xlabel(r"resolution $\gamma$")
    ax.set_ylabel("Jaccard similarity to classification partition")
    ax.set_title("Resolution selection")
    return _save(fig, ndir / "fig_gamma_curve.png", manifest)


def plot_communities(ndir: Path, manifest: str) -> Path | None:
    path = ndir / "communities_report.json"
    if not path.exists():
        return None
    composition = read_json(path)["composition"]
    labels = sorted({e["classification"] for c in composition for e in c["top_classifications"]})
    fig, ax = plt.subplots(figsize=(7, 4.5))
    bottoms = np.zeros(len(composition))
    xs = np.arange(len(composition))
    cmap = plt.get_cmap("tab20")
    color_of = {label: cmap(i % 20) for i, label in enumerate(labels)}
    for label in labels:
        shares = np.array(
            [
                next((e["share"] for e in c["top_classifications"] if e["classification"] == label), 0.0)
                for c in composition
            ]
        )
        ax.bar(xs, shares, bottom=bottoms, label=label, color=color_of[label])
        bottoms += shares
    ax.set_xticks(xs)
    ax.set_xticklabels([str(c["community"]) for c in composition])
    ax.set_xlabel("community")
    ax.set_ylabel("share of topics (top 3 classifications)")
    ax.set_title("Data-driven community composition")
    ax.legend(fontsize=7, ncol=2)
    return _save(fig, ndir / "fig_communities.png", manifest)


def plot_trajectories(ndir: Path, manifest: str) -> Path | None:
    path = ndir / "trajectories.csv"
    if not path.exists():
        return None
    _, standardized = load_trajectories(path)
    centers = np.array(standardized["swp"].centers)
    fig, axes = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    axes[0].plot(centers, standardized["swp"].values, color="tab:orange", label="small-world propensity (z)")
    axes[0].plot(centers, standardized["strength"].values, color="tab:blue", label="mean strength (z)")
    axes[0].axhline(0.0, color="gray", lw=0.6)
    axes[0].legend(fontsize=8)
    axes[0].set_ylabel("z-score")
    axes[1].plot(centers, standardized["xi"].values, color="tab:purple", label="interdisciplinarity (z)")
    axes[1].plot(centers, standardized["deviance"].values, color="tab:green", label="classification deviance (z)")
    axes[1].axhline(0.0, color="gray", lw=0.6)
    axes[1].legend(fontsize=8)
    axes[1].set_ylabel("z-score")
    axes[1].set_xlabel("window center (year)")
    _month_ticks(axes[1], centers)
    fig.suptitle("Standardized temporal trajectories")
    return _save(fig, ndir / "fig_trajectories.png", manifest)


def plot_impact(ndir: Path, manifest: str) -> Path | None:
    impact_path = ndir / "impact_monthly.csv"
    traj_path = ndir / "trajectories.csv"
    if not (impact_path.exists() and traj_path.exists()):
        return None
    _, rows = read_csv_rows(impact_path)
    months = np.array([int(r[0][:4]) * 12 + int(r[0][5:7]) - 1 for r in rows[1:]])
    impact = np.array([float(r[1]) for r in rows[1:]])
    _, standardized = load_trajectories(traj_path)
    xi = standardized["xi"]
    fig, ax1 = plt.subplots(figsize=(7, 4))
    ax1.plot(np.array(xi.centers), xi.values, color="tab:purple", label="interdisciplinarity (z)")
    ax1.set_ylabel("interdisciplinarity (z)", color="tab:purple")
    ax1.set_xlabel("window center (year)")
    _month_ticks(ax1, xi.centers)
    ax2 = ax1.twinx()
    ax2.plot(months, impact, color="tab:green", label="impact factor (spline)")
    ax2.set_ylabel("impact factor", color="tab:green")
    fig.suptitle("Interdisciplinarity and engagement")
    return _save(fig, ndir / "fig_impact.png", manifest)


def plot_null_comparison(ndir: Path, manifest: str) -> Path | None:
    path = ndir / "null_comparison.json"
    if not path.exists():
        return None
    payload = read_json(path)
    fig, axes = plt.subplots(1, 2, figsize=(8, 3.5))
    for ax, key, label in (
        (axes[0], "efficiency", "global efficiency"),
        (axes[1], "clustering", "mean clustering"),
    ):
        block = payload[key]
        ax.axvline(block["observed"], color="tab:red", label="observed")
        mean, sd = block["null_mean"], block["null_sd"]
        xs = np.linspace(mean - 4 * max(sd, 1e-12), mean + 4 * max(sd, 1e-12), 200)
        if sd > 0:
            ax.plot(xs, np.exp(-0.5 * ((xs - mean) / sd) ** 2), color="gray", label="null (scaled)")
        ax.set_xlabel(label)
        ax.legend(fontsize=7)
    fig.suptitle("Observed vs degree/strength-matched nulls")
    return _save(fig, ndir / "fig_null_comparison.png", manifest)


RENDERERS = (
    plot_adjacency,
    plot_node_metrics,
    plot_gamma_curve,
    plot_communities,
    plot_trajectories,
    plot_impact,
    plot_null_comparison,
)


def render_report(ndir: Path, manifest: str) -> list[Path]:
    """Write every figure whose inputs exist; returns the paths written."""
    written = []
    for renderer in RENDERERS:
        path = renderer(ndir, manifest)
        if path is not None:
            written.append(path)
    return written

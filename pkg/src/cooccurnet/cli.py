"""Command-line pipeline: build | communities | temporal | nulls | score | report.

Runs are deterministic: the seed is mandatory, every stochastic step
derives its own stream from it, and rerunning a subcommand with the same
config, seed, and input produces byte-identical outputs regardless of
worker count. Artifacts carry the run manifest hash and completed stages
are skipped on rerun.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .community import (
    DEFAULT_GAMMA_GRID,
    classification_partition,
    consensus_partition,
    modularity,
    select_gamma,
)
from .corpus import Corpus, format_month, parse_corpus
from .errors import CooccurnetError, DataError, NumericError, UsageError
from .exports import (
    artifact_manifest,
    file_sha256,
    fmt,
    load_impact_csv,
    load_network,
    load_null_trajectories,
    load_trajectories,
    load_windows_meta,
    open_csv_writer,
    read_json,
    save_gamma_curve,
    save_metrics,
    save_network,
    save_null_trajectories,
    save_partitions,
    save_trajectories,
    save_windows_meta,
    write_json,
)
from .graphbuild import WindowSpec, build_network, window_centers
from .metrics import clustering_barrat, compute_graph_metrics, compute_node_metrics, global_efficiency
from .nulls import rewire_ensemble, standardize_trajectory
from .pipeline import CorpusIndex, temporal_analysis, window_network
from .scoring import (
    WILCOXON_NOTE,
    compare_dependent_correlations,
    compare_partition_deviances,
    disciplinarity,
    linear_trend,
    partial_correlation,
    residualize,
    spline_interpolate_monthly,
    trend_r2,
)
from .seeding import derive_seed

log = logging.getLogger(__name__)

COMMANDS = ("build", "communities", "temporal", "nulls", "score", "report")
RUNS_PER_GAMMA = 3


@dataclass(frozen=True)
class RunConfig:
    input: Path | None
    out: Path
    seed: int
    ns: tuple[int, ...] = (1000,)
    half_width: int = 6
    step: int = 1
    gamma: float | str = "auto"
    runs: int = 100
    nulls: int = 100
    workers: int = 1
    format: str | None = None
    impact: Path | None = None
    gamma_grid: tuple[float, ...] = tuple(DEFAULT_GAMMA_GRID)

    def validate(self) -> None:
        for name in ("half_width", "step", "runs", "nulls", "workers"):
            if getattr(self, name) < 1:
                raise UsageError(f"{name} must be a positive integer")
        if not self.ns or any(n < 2 for n in self.ns):
            raise UsageError("vocabulary sizes must be >= 2")
        if isinstance(self.gamma, str) and self.gamma != "auto":
            raise UsageError(f"gamma must be a number or 'auto', got {self.gamma!r}")

    def spec(self) -> WindowSpec:
        return WindowSpec(half_width=self.half_width, step=self.step)

    def hash_payload(self) -> dict:
        return {
            "ns": list(self.ns),
            "half_width": self.half_width,
            "step": self.step,
            "gamma": self.gamma,
            "runs": self.runs,
            "nulls": self.nulls,
            "seed": self.seed,
            "version": __version__,
        }


def _parse_config_file(path: Path) -> dict:
    if not path.exists():
        raise UsageError(f"config file not found: {path}")
    values: dict[str, str] = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise UsageError(f"{path}: line {lineno}: expected key=value")
        key, _, value = stripped.partition("=")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _resolve(args: argparse.Namespace) -> RunConfig:
    file_values = _parse_config_file(Path(args.config)) if args.config else {}

    def pick(flag_value, key, default=None):
        if flag_value is not None:
            return flag_value
        return file_values.get(key, default)

    seed = pick(args.seed, "seed")
    if seed is None:
        raise UsageError("a seed is required (--seed or config file); runs never use wall-clock seeding")
    ns = pick(args.n, "n", [1000])
    if isinstance(ns, str):
        ns = ns.replace(",", " ").split()
    gamma = pick(args.gamma, "gamma", "auto")
    if isinstance(gamma, str) and gamma != "auto":
        try:
            gamma = float(gamma)
        except ValueError:
            raise UsageError(f"gamma must be a number or 'auto', got {gamma!r}") from None
    out = pick(args.out, "out")
    if out is None:
        raise UsageError("an output directory is required (--out or config file)")
    input_path = pick(getattr(args, "input", None), "input")
    impact = pick(getattr(args, "impact", None), "impact")
    try:
        config = RunConfig(
            input=None if input_path is None else Path(input_path),
            out=Path(out),
            seed=int(seed),
            ns=tuple(int(n) for n in ns),
            half_width=int(pick(args.half_width, "half_width", 6)),
            step=int(pick(args.step, "step", 1)),
            gamma=gamma,
            runs=int(pick(args.runs, "runs", 100)),
            nulls=int(pick(args.nulls, "nulls", 100)),
            workers=int(pick(args.workers, "workers", 1)),
            format=pick(getattr(args, "format", None), "format"),
            impact=None if impact is None else Path(impact),
        )
    except ValueError as exc:
        raise UsageError(f"invalid configuration value: {exc}") from None
    config.validate()
    return config


class Workspace:
    """Resolved run state: config, manifest hash, and lazily loaded inputs."""

    def __init__(self, config: RunConfig, need_input: bool = True):
        self.config = config
        if need_input:
            if config.input is None:
                raise UsageError("an input corpus is required (--input or config file)")
            if not config.input.exists():
                raise DataError(f"input corpus not found: {config.input}")
            self.input_sha = file_sha256(config.input)
        else:
            manifest_path = config.out / "manifest.json"
            if not manifest_path.exists():
                raise UsageError(f"no manifest.json under {config.out}; run a pipeline stage first")
            self.input_sha = read_json(manifest_path).get("input_sha256", "")
        payload = dict(config.hash_payload(), input_sha256=self.input_sha)
        self.manifest = hashlib.sha256(
            json.dumps(payload, sort_keys=True).encode()
        ).hexdigest()[:16]
        self._corpus: Corpus | None = None
        self._index: CorpusIndex | None = None
        config.out.mkdir(parents=True, exist_ok=True)
        write_json(
            config.out / "manifest.json",
            {
                "config": payload,
                "config_hash": self.manifest,
                "input_sha256": self.input_sha,
                "package_version": __version__,
            },
            self.manifest,
        )

    @property
    def corpus(self) -> Corpus:
        if self._corpus is None:
            self._corpus = parse_corpus(self.config.input, self.config.format)
        return self._corpus

    @property
    def index(self) -> CorpusIndex:
        if self._index is None:
            self._index = CorpusIndex.build(self.corpus)
        return self._index

    def ndir(self, n: int) -> Path:
        path = self.config.out / f"n{n}"
        path.mkdir(parents=True, exist_ok=True)
        return path

    def is_current(self, *paths: Path) -> bool:
        return all(artifact_manifest(p) == self.manifest for p in paths)


def _network_paths(ndir: Path) -> tuple[Path, Path, Path]:
    return ndir / "network_edges.csv", ndir / "network_nodes.json", ndir / "metrics.json"


def ensure_network(ws: Workspace, n: int):
    """Load the built network for this config, building and saving if needed."""
    ndir = ws.ndir(n)
    edges, nodes, metrics = _network_paths(ndir)
    if ws.is_current(edges, nodes):
        return load_network(edges, nodes)
    net = build_network(ws.corpus, n)
    save_network(net, edges, nodes, ws.manifest)
    node_metrics = compute_node_metrics(net)
    graph_metrics = compute_graph_metrics(net, seed=derive_seed(ws.config.seed, 100, n))
    save_metrics(metrics, net, node_metrics, graph_metrics, ws.manifest)
    return net


def cmd_build(config: RunConfig) -> None:
    ws = Workspace(config)
    for n in config.ns:
        edges, nodes, metrics = _network_paths(ws.ndir(n))
        if ws.is_current(edges, nodes, metrics):
            print(f"build n={n}: cached")
            continue
        net = ensure_network(ws, n)
        print(f"build n={n}: {net.n_nodes} nodes, {net.edge_count} edges -> {ws.ndir(n)}")


def _resolve_gamma(ws: Workspace, n: int, net, reference) -> tuple[float, object | None]:
    if ws.config.gamma != "auto":
        return float(ws.config.gamma), None
    selection = select_gamma(
        net,
        reference,
        grid=ws.config.gamma_grid,
        runs_per_gamma=RUNS_PER_GAMMA,
        seed=derive_seed(ws.config.seed, 200, n),
        consensus_runs=ws.config.runs,
    )
    return selection.gamma, selection


def _composition_table(partition, vocab) -> list[dict]:
    table = []
    for c in range(1, partition.n_communities + 1):
        members = [vocab.classifications[i] for i in np.flatnonzero(partition.labels == c)]
        counts = {}
        for label in members:
            counts[label] = counts.get(label, 0) + 1
        top = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:3]
        table.append(
            {
                "community": c,
                "size": len(members),
                "top_classifications": [
                    {"classification": label, "share": count / len(members)}
                    for label, count in top
                ],
            }
        )
    return table


def cmd_communities(config: RunConfig) -> None:
    ws = Workspace(config)
    for n in config.ns:
        ndir = ws.ndir(n)
        report_path = ndir / "communities_report.json"
        if ws.is_current(report_path):
            print(f"communities n={n}: cached")
            continue
        net = ensure_network(ws, n)
        reference = classification_partition(net.vocab)
        gamma, selection = _resolve_gamma(ws, n, net, reference)
        if selection is not None:
            save_gamma_curve(ndir / "gamma_curve.csv", selection, ws.manifest)
        consensus = consensus_partition(
            net, gamma, runs=config.runs, seed=derive_seed(config.seed, 201, n)
        )
        data_driven = consensus.partition
        q_data = modularity(net, data_driven, gamma)
        q_class = modularity(net, reference, gamma)
        try:
            comparison = compare_partition_deviances(net, reference, data_driven)
            null_center = comparison.n_pairs * (comparison.n_pairs + 1) / 4.0
            deviance_block = {
                "statistic": comparison.statistic,
                "p_value": comparison.pvalue,
                "n_pairs": comparison.n_pairs,
                "higher_under": "classification" if comparison.statistic > null_center else "data_driven",
                "method_note": comparison.method_note,
            }
        except NumericError as exc:
            deviance_block = {"degenerate": str(exc), "method_note": WILCOXON_NOTE}
        save_partitions(ndir / "partitions.csv", net.vocab, [reference, data_driven], ws.manifest)
        payload = {
            "gamma": gamma,
            "gamma_mode": "auto" if config.gamma == "auto" else "fixed",
            "consensus": {"runs": consensus.runs, "converged": consensus.converged},
            "modularity": {"data_driven": q_data, "classification": q_class},
            "n_communities": {
                "data_driven": data_driven.n_communities,
                "classification": reference.n_communities,
            },
            "deviance_comparison": deviance_block,
            "disciplinarity": {
                "data_driven": disciplinarity(data_driven, net.vocab),
                "classification": disciplinarity(reference, net.vocab),
            },
            "composition": _composition_table(data_driven, net.vocab),
        }
        write_json(report_path, payload, ws.manifest)
        print(
            f"communities n={n}: gamma={gamma} Q(data)={q_data:.4f} Q(class)={q_class:.4f} "
            f"communities={data_driven.n_communities}"
        )


def cmd_temporal(config: RunConfig) -> None:
    ws = Workspace(config)
    for n in config.ns:
        ndir = ws.ndir(n)
        artifacts = [
            ndir / "trajectories.csv",
            ndir / "null_trajectories.csv",
            ndir / "trends.json",
            ndir / "windows_meta.csv",
        ]
        if ws.is_current(*artifacts):
            print(f"temporal n={n}: cached")
            continue
        analysis = temporal_analysis(
            ws.index,
            config.spec(),
            n,
            null_count=config.nulls,
            seed=config.seed,
            workers=config.workers,
        )
        save_trajectories(
            artifacts[0], analysis.observed.trajectories, analysis.standardized, ws.manifest
        )
        save_null_trajectories(artifacts[1], analysis.nulls, ws.manifest)
        trends = {}
        for measure, traj in analysis.standardized.items():
            slope, _ = linear_trend(traj.values)
            r2, p = trend_r2(traj, analysis.standardized_null_series(measure))
            trends[measure] = {
                "slope": slope,
                "r2": r2,
                "p_value": p,
                "mean_z": float(np.mean(traj.values)),
            }
        write_json(artifacts[2], {"trends": trends, "null_count": config.nulls}, ws.manifest)
        save_windows_meta(artifacts[3], analysis.observed.windows, ws.manifest)
        windows_dir = ndir / "windows"
        windows_dir.mkdir(exist_ok=True)
        for record in analysis.observed.windows:
            net = window_network(ws.index, record.center, config.half_width, n)
            stem = format_month(record.center)
            save_network(
                net, windows_dir / f"{stem}_edges.csv", windows_dir / f"{stem}_nodes.json", ws.manifest
            )
        print(f"temporal n={n}: {len(analysis.observed.windows)} windows, {config.nulls} nulls")


def cmd_nulls(config: RunConfig) -> None:
    ws = Workspace(config)
    for n in config.ns:
        ndir = ws.ndir(n)
        manifest_path = ndir / "null_ensemble.json"
        comparison_path = ndir / "null_comparison.json"
        if ws.is_current(manifest_path, comparison_path):
            print(f"nulls n={n}: cached")
            continue
        net = ensure_network(ws, n)
        ensemble = rewire_ensemble(net, count=config.nulls, base_seed=derive_seed(config.seed, 300, n))
        write_json(
            manifest_path,
            {
                "generator": ensemble.generator,
                "base_seed": ensemble.base_seed,
                "count": len(ensemble),
                "preservation_report": ensemble.preservation_report,
            },
            ws.manifest,
        )
        obs_eff = global_efficiency(net)
        _, obs_clust = clustering_barrat(net)
        null_eff = np.array([global_efficiency(m) for m in ensemble.members])
        null_clust = np.array([clustering_barrat(m)[1] for m in ensemble.members])
        m = len(ensemble)
        payload = {
            "efficiency": {
                "observed": obs_eff,
                "null_mean": float(null_eff.mean()),
                "null_sd": float(null_eff.std(ddof=1)) if m > 1 else 0.0,
                "p_lower": (1 + int(np.count_nonzero(null_eff <= obs_eff))) / (1 + m),
            },
            "clustering": {
                "observed": obs_clust,
                "null_mean": float(null_clust.mean()),
                "null_sd": float(null_clust.std(ddof=1)) if m > 1 else 0.0,
                "p_higher": (1 + int(np.count_nonzero(null_clust >= obs_clust))) / (1 + m),
            },
        }
        write_json(comparison_path, payload, ws.manifest)
        print(
            f"nulls n={n}: {m} members, efficiency p={payload['efficiency']['p_lower']:.4f}, "
            f"clustering p={payload['clustering']['p_higher']:.4f}"
        )


def _standardized_nulls(null_trajs):
    out = {}
    for measure, members in null_trajs.items():
        out[measure] = [standardize_trajectory(t, members) for t in members]
    return out


def cmd_score(config: RunConfig) -> None:
    if config.impact is None:
        raise UsageError("score requires an impact series (--impact or config key impact)")
    ws = Workspace(config)
    impact_sha = file_sha256(config.impact)
    yearly = load_impact_csv(config.impact)
    for n in config.ns:
        ndir = ws.ndir(n)
        report_path = ndir / "score_report.json"
        if ws.is_current(report_path) and read_json(report_path).get("impact_sha256") == impact_sha:
            print(f"score n={n}: cached")
            continue
        traj_path = ndir / "trajectories.csv"
        if not ws.is_current(traj_path, ndir / "null_trajectories.csv", ndir / "windows_meta.csv"):
            cmd_temporal(config)
        _, standardized = load_trajectories(traj_path)
        null_trajs = load_null_trajectories(ndir / "null_trajectories.csv")
        windows = load_windows_meta(ndir / "windows_meta.csv")
        months, impact_values = spline_interpolate_monthly(yearly)
        handle, writer = open_csv_writer(ndir / "impact_monthly.csv", ws.manifest)
        with handle:
            writer.writerow(["month", "impact"])
            for month, value in zip(months, impact_values):
                writer.writerow([format_month(month), fmt(value)])
        impact_by_month = dict(zip(months, impact_values))
        centers = standardized["xi"].centers
        aligned = [t for t, c in enumerate(centers) if c in impact_by_month]
        if len(aligned) < 10:
            raise DataError(
                f"only {len(aligned)} windows overlap the impact series; need >= 10"
            )
        pub_counts = {c: docs for c, docs, _ in windows}
        impact_at = np.array([impact_by_month[centers[t]] for t in aligned])
        pubs_at = np.array([float(pub_counts[centers[t]]) for t in aligned])
        impact_resid = residualize(impact_at, pubs_at)
        ss_tot = float(np.sum((impact_at - impact_at.mean()) ** 2))
        pub_r2 = 1.0 - float(np.sum(impact_resid**2)) / ss_tot if ss_tot > 0 else 0.0
        z_at = {m: standardized[m].values[aligned] for m in ("xi", "swp", "deviance", "strength")}
        z_nulls = _standardized_nulls(null_trajs)
        partials = {}
        for measure in ("xi", "swp", "deviance"):
            r_obs = partial_correlation(z_at[measure], impact_resid, z_at["strength"])
            null_rs = []
            for k in range(len(z_nulls[measure])):
                null_rs.append(
                    partial_correlation(
                        z_nulls[measure][k].values[aligned],
                        impact_resid,
                        z_nulls["strength"][k].values[aligned],
                    )
                )
            null_rs = np.array(null_rs)
            k_extreme = int(np.count_nonzero(np.abs(null_rs) >= abs(r_obs)))
            partials[measure] = {
                "r": r_obs,
                "p_value": (1 + k_extreme) / (1 + len(null_rs)),
                "null_mean_r": float(null_rs.mean()),
            }
        resid = {
            m: residualize(z_at[m], z_at["strength"]) for m in ("xi", "swp", "deviance")
        }
        impact_tilde = residualize(impact_resid, z_at["strength"])
        n_obs = len(aligned)
        comparisons = {}
        for other in ("swp", "deviance"):
            r_xy = float(np.corrcoef(impact_tilde, resid["xi"])[0, 1])
            r_xz = float(np.corrcoef(impact_tilde, resid[other])[0, 1])
            r_yz = float(np.corrcoef(resid["xi"], resid[other])[0, 1])
            t_stat, p = compare_dependent_correlations(r_xy, r_xz, r_yz, n_obs)
            comparisons[f"xi_vs_{other}"] = {"t": t_stat, "p_value": p}
        payload = {
            "impact_sha256": impact_sha,
            "n_windows": n_obs,
            "publication_residualization_r2": pub_r2,
            "partial_correlations": partials,
            "dependent_correlation_comparisons": comparisons,
            "method_notes": [
                "partial correlations control for standardized strength",
                "p-values compare against the temporal-null correlation distribution, two-sided",
                WILCOXON_NOTE,
            ],
        }
        write_json(report_path, payload, ws.manifest)
        print(
            f"score n={n}: xi r={partials['xi']['r']:.3f} (p={partials['xi']['p_value']:.4f}) "
            f"over {n_obs} windows"
        )


def cmd_report(config: RunConfig) -> None:
    from .report import render_report

    ws = Workspace(config, need_input=False)
    for n in config.ns:
        figures = render_report(ws.ndir(n), ws.manifest)
        if figures:
            print(f"report n={n}: wrote {', '.join(p.name for p in figures)}")
        else:
            print(f"report n={n}: no artifacts found to plot")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> _Parser:
    parser = _Parser(prog="cooccurnet", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=f"{name} stage")
        p.add_argument("--config", help="flat key=value config file; flags override it")
        p.add_argument("--input", help="corpus file (JSONL or CSV)")
        p.add_argument("--format", choices=["jsonl", "csv"], help="corpus format (default: by suffix)")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, help="base random seed (required)")
        p.add_argument("--n", type=int, nargs="+", help="vocabulary size(s), e.g. --n 950 1000 1050")
        p.add_argument("--gamma", help="resolution parameter or 'auto'")
        p.add_argument("--runs", type=int, help="louvain runs per consensus (default 100)")
        p.add_argument("--nulls", type=int, help="null ensemble size (default 100)")
        p.add_argument("--half-width", dest="half_width", type=int, help="window half-width in months (default 6)")
        p.add_argument("--step", type=int, help="window step in months (default 1)")
        p.add_argument("--workers", type=int, help="worker processes (default 1)")
        if name == "score":
            p.add_argument("--impact", help="CSV of (year, impact_factor)")
    return parser


DISPATCH = {
    "build": cmd_build,
    "communities": cmd_communities,
    "temporal": cmd_temporal,
    "nulls": cmd_nulls,
    "score": cmd_score,
    "report": cmd_report,
}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        config = _resolve(args)
        DISPATCH[args.command](config)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except CooccurnetError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

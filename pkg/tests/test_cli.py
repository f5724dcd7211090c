import json
from pathlib import Path

import numpy as np
import pytest

from conftest import net_from_weights, random_dyadic_graph
from cooccurnet.cli import main
from cooccurnet.exports import (
    artifact_manifest,
    load_impact_csv,
    load_network,
    load_null_trajectories,
    load_trajectories,
    read_json,
    save_network,
    save_null_trajectories,
    save_trajectories,
)
from cooccurnet.synthetic import (
    impact_series,
    mixing_corpus,
    write_corpus_jsonl,
    write_impact_csv,
)
from cooccurnet.trajectories import MeasureTrajectory


@pytest.fixture(scope="module")
def corpus_file(tmp_path_factory):
    root = tmp_path_factory.mktemp("data")
    corpus = mixing_corpus(seed=5, start="2000-01", end="2003-12", docs_per_month=5)
    path = root / "corpus.jsonl"
    write_corpus_jsonl(corpus, path)
    impact = root / "impact.csv"
    write_impact_csv(impact_series(5, 2000, 2003), impact)
    return path, impact


def run_args(corpus_file, out, extra=()):
    path, _ = corpus_file
    return [
        "--input", str(path), "--out", str(out), "--seed", "13",
        "--n", "10", "--nulls", "5", "--runs", "6", "--gamma", "1.0", "--step", "3",
        *extra,
    ]


class TestExportRoundTrips:
    def test_network_round_trip(self, tmp_path):
        w = random_dyadic_graph(8, 0.5, seed=3)
        net = net_from_weights(w, classifications=["bio"] * 4 + ["chem"] * 4)
        save_network(net, tmp_path / "e.csv", tmp_path / "n.json", manifest="abc")
        loaded = load_network(tmp_path / "e.csv", tmp_path / "n.json")
        assert loaded.vocab.phrases == net.vocab.phrases
        assert loaded.vocab.classifications == net.vocab.classifications
        assert np.array_equal(loaded.weights, net.weights)
        assert artifact_manifest(tmp_path / "e.csv") == "abc"
        assert artifact_manifest(tmp_path / "n.json") == "abc"

    def test_trajectories_round_trip(self, tmp_path):
        centers = tuple(range(24000, 24005))
        observed = {
            m: MeasureTrajectory(centers, np.linspace(0, 1, 5) + i, m)
            for i, m in enumerate(("swp", "deviance", "xi", "strength"))
        }
        standardized = {
            m: MeasureTrajectory(centers, np.linspace(-1, 1, 5), m, standardized=True)
            for m in observed
        }
        save_trajectories(tmp_path / "t.csv", observed, standardized, manifest="m1")
        obs2, std2 = load_trajectories(tmp_path / "t.csv")
        for m in observed:
            assert np.array_equal(obs2[m].values, observed[m].values)
            assert np.array_equal(std2[m].values, standardized[m].values)
            assert obs2[m].centers == centers

    def test_null_trajectories_round_trip(self, tmp_path):
        from cooccurnet.pipeline import TrajectoryBundle

        centers = tuple(range(24000, 24004))
        bundles = [
            TrajectoryBundle(
                trajectories={
                    "strength": MeasureTrajectory(centers, np.arange(4.0) + k, "strength")
                },
                windows=[],
            )
            for k in range(3)
        ]
        save_null_trajectories(tmp_path / "nt.csv", bundles, manifest="m2")
        loaded = load_null_trajectories(tmp_path / "nt.csv")
        assert len(loaded["strength"]) == 3
        for k in range(3):
            assert np.array_equal(loaded["strength"][k].values, np.arange(4.0) + k)

    def test_impact_csv_with_and_without_header(self, tmp_path):
        with_header = tmp_path / "a.csv"
        with_header.write_text("year,impact_factor\n2000,9.5\n2001,10.25\n")
        bare = tmp_path / "b.csv"
        bare.write_text("2000,9.5\n2001,10.25\n")
        assert load_impact_csv(with_header) == {2000: 9.5, 2001: 10.25}
        assert load_impact_csv(bare) == {2000: 9.5, 2001: 10.25}


class TestCliContracts:
    def test_missing_seed_is_usage_error(self, corpus_file, tmp_path, capsys):
        path, _ = corpus_file
        code = main(["build", "--input", str(path), "--out", str(tmp_path / "o")])
        assert code == 1
        assert "seed" in capsys.readouterr().err

    def test_missing_input_is_data_error(self, tmp_path, capsys):
        code = main(
            ["build", "--input", str(tmp_path / "nope.jsonl"), "--out", str(tmp_path / "o"),
             "--seed", "1"]
        )
        assert code == 2

    def test_oversized_vocabulary_reports_available(self, corpus_file, tmp_path, capsys):
        out = tmp_path / "o"
        code = main(["build", *run_args(corpus_file, out, extra=["--n", "5000"])])
        assert code == 2
        assert "candidates" in capsys.readouterr().err

    def test_bad_gamma_is_usage_error(self, corpus_file, tmp_path):
        assert main(["build", *run_args(corpus_file, tmp_path / "o"), "--gamma", "zzz"]) == 1

    def test_report_without_manifest_is_usage_error(self, tmp_path):
        assert main(["report", "--out", str(tmp_path / "empty"), "--seed", "1"]) == 1

    def test_config_file_with_flag_override(self, corpus_file, tmp_path):
        path, _ = corpus_file
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            f"input={path}\nout={tmp_path / 'from_file'}\nseed=13\nn=10\n"
            "nulls=5\nruns=6\ngamma=1.0\nstep=3\n"
        )
        assert main(["build", "--config", str(cfg)]) == 0
        assert (tmp_path / "from_file" / "n10" / "network_edges.csv").exists()
        # flag overrides the file's out
        assert main(["build", "--config", str(cfg), "--out", str(tmp_path / "flag_wins")]) == 0
        assert (tmp_path / "flag_wins" / "n10" / "network_edges.csv").exists()

    def test_build_artifacts_and_cache(self, corpus_file, tmp_path, capsys):
        out = tmp_path / "o"
        assert main(["build", *run_args(corpus_file, out)]) == 0
        ndir = out / "n10"
        assert (ndir / "network_edges.csv").exists()
        assert (ndir / "network_nodes.json").exists()
        assert (ndir / "metrics.json").exists()
        manifest = read_json(out / "manifest.json")
        assert manifest["config_hash"] == artifact_manifest(ndir / "network_edges.csv")
        capsys.readouterr()
        assert main(["build", *run_args(corpus_file, out)]) == 0
        assert "cached" in capsys.readouterr().out

    def test_communities_report_content(self, corpus_file, tmp_path):
        out = tmp_path / "o"
        assert main(["communities", *run_args(corpus_file, out)]) == 0
        report = read_json(out / "n10" / "communities_report.json")
        assert report["modularity"]["data_driven"] >= report["modularity"]["classification"] - 1e-9
        assert report["disciplinarity"]["classification"] == 1.0
        sizes = [c["size"] for c in report["composition"]]
        assert sum(sizes) == 10
        for community in report["composition"]:
            assert len(community["top_classifications"]) <= 3

    def test_gamma_auto_writes_curve(self, corpus_file, tmp_path):
        out = tmp_path / "o"
        args = run_args(corpus_file, out)
        idx = args.index("--gamma")
        args[idx + 1] = "auto"
        cfg_grid_patch = ["--runs", "4"]
        assert main(["communities", *args, *cfg_grid_patch]) == 0
        assert (out / "n10" / "gamma_curve.csv").exists()

    def test_temporal_and_score(self, corpus_file, tmp_path):
        out = tmp_path / "o"
        _, impact = corpus_file
        assert main(["temporal", *run_args(corpus_file, out)]) == 0
        ndir = out / "n10"
        assert (ndir / "trajectories.csv").exists()
        trends = read_json(ndir / "trends.json")
        assert set(trends["trends"]) == {"strength", "swp", "deviance", "xi"}
        for block in trends["trends"].values():
            assert 0 <= block["r2"] <= 1
            assert 0 < block["p_value"] <= 1
        windows = (ndir / "windows").glob("*_edges.csv")
        assert len(list(windows)) == len(open(ndir / "windows_meta.csv").readlines()) - 2
        assert main(["score", *run_args(corpus_file, out), "--impact", str(impact)]) == 0
        score = read_json(ndir / "score_report.json")
        assert set(score["partial_correlations"]) == {"xi", "swp", "deviance"}
        for block in score["partial_correlations"].values():
            assert -1 <= block["r"] <= 1
            assert 0 < block["p_value"] <= 1
        assert "xi_vs_swp" in score["dependent_correlation_comparisons"]

    def test_nulls_command(self, corpus_file, tmp_path):
        out = tmp_path / "o"
        assert main(["nulls", *run_args(corpus_file, out)]) == 0
        ensemble = read_json(out / "n10" / "null_ensemble.json")
        assert ensemble["count"] == 5
        assert ensemble["preservation_report"]["degree_exact"] is True
        comparison = read_json(out / "n10" / "null_comparison.json")
        assert 0 < comparison["efficiency"]["p_lower"] <= 1
        assert 0 < comparison["clustering"]["p_higher"] <= 1

    def test_report_renders_figures(self, corpus_file, tmp_path):
        out = tmp_path / "o"
        assert main(["build", *run_args(corpus_file, out)]) == 0
        assert main(["temporal", *run_args(corpus_file, out)]) == 0
        assert main(["report", *run_args(corpus_file, out)]) == 0
        ndir = out / "n10"
        assert (ndir / "fig_adjacency.png").exists()
        assert (ndir / "fig_trajectories.png").exists()
        assert (ndir / "fig_betweenness.png").exists()

    def test_multi_n_sweep(self, corpus_file, tmp_path):
        out = tmp_path / "o"
        args = run_args(corpus_file, out)
        idx = args.index("--n")
        args = args[:idx] + ["--n", "8", "10"] + args[idx + 2:]
        assert main(["build", *args]) == 0
        assert (out / "n8" / "network_edges.csv").exists()
        assert (out / "n10" / "network_edges.csv").exists()

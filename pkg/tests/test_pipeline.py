import numpy as np
import pytest

from cooccurnet.corpus import parse_month
from cooccurnet.errors import DataError
from cooccurnet.graphbuild import WindowSpec, build_network
from cooccurnet.nulls import permute_corpus_temporal
from cooccurnet.pipeline import (
    CorpusIndex,
    compute_trajectories,
    null_trajectory_ensemble,
    temporal_analysis,
    window_network,
)
from cooccurnet.scoring import linear_trend
from cooccurnet.seeding import STREAM_TEMPORAL_NULL, derive_seed
from cooccurnet.synthetic import mixing_corpus, stationary_corpus, strengthening_corpus


@pytest.fixture(scope="module")
def small_corpus():
    return stationary_corpus(seed=3, start="2000-01", end="2002-12", docs_per_month=5)


@pytest.fixture(scope="module")
def small_index(small_corpus):
    return CorpusIndex.build(small_corpus)


class TestIndexConsistency:
    def test_window_network_matches_corpus_path(self, small_corpus, small_index):
        center = parse_month("2001-06")
        fast = window_network(small_index, center, half_width=6, n=10)
        slow = build_network(small_corpus, 10, WindowSpec(center=center, half_width=6))
        assert fast.vocab.phrases == slow.vocab.phrases
        assert fast.vocab.prevalence == slow.vocab.prevalence
        assert fast.vocab.classifications == slow.vocab.classifications
        assert np.array_equal(fast.weights, slow.weights)

    def test_permuted_index_matches_corpus_permutation(self, small_corpus, small_index):
        member_seed = derive_seed(11, STREAM_TEMPORAL_NULL, 1)
        permuted_corpus = permute_corpus_temporal(small_corpus, member_seed)
        permuted_index = small_index.permuted(member_seed)
        center = parse_month("2001-06")
        via_corpus = build_network(permuted_corpus, 10, WindowSpec(center=center, half_width=6))
        via_index = window_network(permuted_index, center, half_width=6, n=10)
        assert via_corpus.vocab.phrases == via_index.vocab.phrases
        assert np.array_equal(via_corpus.weights, via_index.weights)

    def test_span(self, small_index):
        assert small_index.span == (parse_month("2000-01"), parse_month("2002-12"))


class TestTrajectories:
    def test_window_count_and_centers(self, small_index):
        bundle = compute_trajectories(small_index, WindowSpec(half_width=6), n=10, seed=5)
        # 36-month span, +/-6 window: centers 2000-07 .. 2002-06
        assert len(bundle.windows) == 24
        traj = bundle.trajectories["strength"]
        assert traj.centers[0] == parse_month("2000-07")
        assert traj.centers[-1] == parse_month("2002-06")

    def test_deterministic(self, small_index):
        a = compute_trajectories(small_index, WindowSpec(half_width=6), n=10, seed=5)
        b = compute_trajectories(small_index, WindowSpec(half_width=6), n=10, seed=5)
        for m in a.trajectories:
            assert np.array_equal(a.trajectories[m].values, b.trajectories[m].values)

    def test_measure_subset(self, small_index):
        bundle = compute_trajectories(
            small_index, WindowSpec(half_width=6), n=10, seed=5, measures=("strength",)
        )
        assert set(bundle.trajectories) == {"strength"}

    def test_too_short_span_rejected(self):
        corpus = stationary_corpus(seed=1, start="2000-01", end="2000-10", docs_per_month=4)
        index = CorpusIndex.build(corpus)
        with pytest.raises(DataError):
            compute_trajectories(index, WindowSpec(half_width=6), n=8, seed=1)


class TestNullEnsemble:
    def test_members_distinct_and_aligned(self, small_index):
        spec = WindowSpec(half_width=6, step=2)
        nulls = null_trajectory_ensemble(small_index, spec, n=10, count=3, seed=9)
        observed = compute_trajectories(small_index, spec, n=10, seed=9)
        centers = observed.trajectories["strength"].centers
        values = []
        for bundle in nulls:
            assert bundle.trajectories["strength"].centers == centers
            values.append(tuple(bundle.trajectories["strength"].values))
        assert len(set(values)) == 3

    def test_worker_count_does_not_change_results(self, small_index):
        spec = WindowSpec(half_width=6, step=3)
        serial = null_trajectory_ensemble(small_index, spec, n=10, count=2, seed=4, workers=1)
        parallel = null_trajectory_ensemble(small_index, spec, n=10, count=2, seed=4, workers=2)
        for a, b in zip(serial, parallel):
            for m in a.trajectories:
                assert np.array_equal(a.trajectories[m].values, b.trajectories[m].values)


class TestTemporalAnalysis:
    def test_standardized_series_present(self, small_index):
        spec = WindowSpec(half_width=6, step=2)
        analysis = temporal_analysis(small_index, spec, n=10, null_count=5, seed=2)
        for m in ("strength", "swp", "deviance", "xi"):
            z = analysis.standardized[m]
            assert z.standardized
            assert len(z) == len(analysis.observed.trajectories[m])

    def test_stationary_corpus_z_near_zero(self):
        corpus = stationary_corpus(seed=21, start="2000-01", end="2004-12", docs_per_month=6)
        index = CorpusIndex.build(corpus)
        analysis = temporal_analysis(
            index, WindowSpec(half_width=6, step=2), n=12, null_count=12, seed=21
        )
        z = analysis.standardized["strength"]
        assert abs(float(np.mean(z.values))) <= 0.5

    def test_planted_strengthening_detected(self):
        corpus = strengthening_corpus(seed=13, start="2000-01", end="2004-12", docs_per_month=6)
        index = CorpusIndex.build(corpus)
        observed = compute_trajectories(
            index, WindowSpec(half_width=6, step=2), n=12, seed=13, measures=("strength",)
        )
        slope, r2 = linear_trend(observed.trajectories["strength"].values)
        assert slope > 0
        assert r2 > 0.5

    def test_planted_mixing_raises_xi(self):
        corpus = mixing_corpus(seed=17, start="2000-01", end="2004-12", docs_per_month=6)
        index = CorpusIndex.build(corpus)
        observed = compute_trajectories(index, WindowSpec(half_width=6, step=2), n=12, seed=17)
        slope, _ = linear_trend(observed.trajectories["xi"].values)
        assert slope > 0

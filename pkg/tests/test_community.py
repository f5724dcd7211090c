import numpy as np
import pytest

from conftest import net_from_weights, planted_partition_graph, random_dyadic_graph, two_cliques
from cooccurnet.community import (
    ConsensusResult,
    Partition,
    classification_partition,
    consensus_partition,
    louvain_partition,
    modularity,
    partition_jaccard,
    select_gamma,
)
from cooccurnet.corpus import TopicVocabulary
from cooccurnet.errors import DataError
from oracles import (
    best_partition_exhaustive,
    brute_modularity,
    brute_signed_modularity,
    pair_counting_jaccard,
)


def part(labels, origin="planted", gamma=None):
    return Partition(labels=np.asarray(labels), origin=origin, gamma=gamma)


class TestPartitionType:
    def test_contiguous_labels_required(self):
        with pytest.raises(DataError):
            part([1, 3, 3])

    def test_canonical_relabeling(self):
        assert part([2, 1, 2, 3]).canonical() == (1, 2, 1, 3)
        assert part([1, 2, 1, 3]).canonical() == (1, 2, 1, 3)

    def test_classification_partition(self):
        vocab = TopicVocabulary(
            phrases=("a", "b", "c"),
            prevalence=(0.9, 0.8, 0.7),
            classifications=("chem", "bio", "chem"),
        )
        p = classification_partition(vocab)
        assert p.origin == "classification"
        assert p.names == ("bio", "chem")
        assert p.labels.tolist() == [2, 1, 2]


class TestModularity:
    def test_single_community_zero(self):
        w = random_dyadic_graph(8, 0.5, seed=1)
        net = net_from_weights(w)
        assert modularity(net, part([1] * 8)) == pytest.approx(0.0, abs=1e-15)

    def test_two_cliques_half(self):
        net = net_from_weights(two_cliques(4))
        labels = [1] * 4 + [2] * 4
        assert modularity(net, part(labels)) == pytest.approx(0.5, abs=1e-15)

    def test_matches_brute_oracle(self):
        rng = np.random.default_rng(3)
        for seed in range(5):
            w = random_dyadic_graph(9, 0.4, seed=seed)
            if not (w > 0).any():
                continue
            net = net_from_weights(w)
            labels = rng.integers(1, 4, size=9)
            labels = part(np.unique(labels, return_inverse=True)[1] + 1)
            for gamma in (0.7, 1.0, 1.4):
                assert modularity(net, labels, gamma) == pytest.approx(
                    brute_modularity(w, labels.labels, gamma), abs=1e-12
                )

    def test_relabeling_invariance(self):
        w = two_cliques(4, bridge=0.5)
        net = net_from_weights(w)
        q1 = modularity(net, part([1] * 4 + [2] * 4))
        q2 = modularity(net, part([2] * 4 + [1] * 4))
        assert q1 == q2

    def test_signed_equals_positive_when_no_negatives(self):
        w = random_dyadic_graph(8, 0.5, seed=9)
        net = net_from_weights(w)
        labels = part([1, 1, 2, 2, 3, 3, 1, 2])
        assert modularity(net, labels, signed=True) == pytest.approx(
            modularity(net, labels, signed=False), abs=1e-12
        )

    def test_signed_matches_brute(self):
        rng = np.random.default_rng(11)
        w = random_dyadic_graph(8, 0.6, seed=5)
        signs = rng.choice([-1.0, 1.0], size=w.shape)
        signs = np.triu(signs, 1) + np.triu(signs, 1).T
        ws = w * signs
        net = net_from_weights(ws, signed=True)
        labels = part([1, 2, 1, 2, 1, 2, 1, 2])
        assert modularity(net, labels, gamma=1.2, signed=True) == pytest.approx(
            brute_signed_modularity(ws, labels.labels, 1.2), abs=1e-12
        )

    def test_negative_weights_need_signed_flag(self):
        w = np.zeros((4, 4))
        w[0, 1] = w[1, 0] = -0.5
        w[2, 3] = w[3, 2] = 0.5
        net = net_from_weights(w, signed=True)
        with pytest.raises(DataError):
            modularity(net, part([1, 1, 2, 2]), signed=False)

    def test_empty_network_rejected(self):
        net = net_from_weights(np.zeros((4, 4)))
        with pytest.raises(DataError):
            modularity(net, part([1, 1, 2, 2]))


class TestLouvain:
    def test_two_cliques_with_bridge_recovered(self):
        w = two_cliques(4, bridge=1.0)
        net = net_from_weights(w)
        p = louvain_partition(net, gamma=1.0, seed=7)
        assert p.canonical() == (1, 1, 1, 1, 2, 2, 2, 2)
        # exhaustive search confirms this is the global optimum
        q_star, labels_star = best_partition_exhaustive(w, gamma=1.0)
        assert modularity(net, p) == pytest.approx(q_star, abs=1e-12)

    def test_matches_exhaustive_on_random_graphs(self):
        for seed in (1, 4):
            w = random_dyadic_graph(7, 0.5, seed=seed)
            if not (w > 0).any():
                continue
            net = net_from_weights(w)
            q_star, _ = best_partition_exhaustive(w, gamma=1.0)
            best = max(
                modularity(net, louvain_partition(net, 1.0, seed=s)) for s in range(8)
            )
            assert best >= q_star - 1e-9

    def test_edgeless_rejected(self):
        with pytest.raises(DataError):
            louvain_partition(net_from_weights(np.zeros((4, 4))), gamma=1.0, seed=1)

    def test_deterministic_per_seed(self):
        w, _ = planted_partition_graph(32, 4, 0.5, 0.05, seed=3)
        net = net_from_weights(w)
        a = louvain_partition(net, 1.0, seed=42)
        b = louvain_partition(net, 1.0, seed=42)
        assert a.canonical() == b.canonical()

    def test_planted_partition_recovery(self):
        hits = 0
        for seed in range(5):
            w, truth = planted_partition_graph(64, 4, 0.4, 0.02, seed=seed)
            net = net_from_weights(w)
            p = louvain_partition(net, 1.0, seed=seed)
            if partition_jaccard(p, part(truth)) >= 0.9:
                hits += 1
        assert hits >= 4

    def test_high_gamma_splits_finer(self):
        w = two_cliques(4, bridge=1.0)
        net = net_from_weights(w)
        coarse = louvain_partition(net, gamma=0.3, seed=1)
        fine = louvain_partition(net, gamma=3.5, seed=1)
        assert fine.n_communities >= coarse.n_communities


class TestConsensus:
    def test_identical_runs_converge_immediately(self):
        w = two_cliques(4, bridge=1.0)
        net = net_from_weights(w)
        result = consensus_partition(net, gamma=1.0, runs=10, seed=5)
        assert result.converged
        assert result.partition.canonical() == (1, 1, 1, 1, 2, 2, 2, 2)

    def test_coassignment_ones_within_cliques(self):
        w = two_cliques(4, bridge=0.5)
        net = net_from_weights(w)
        result = consensus_partition(net, gamma=1.0, runs=20, seed=2)
        co = result.coassignment
        assert np.all(co[:4, :4] == 1.0)
        assert np.all(co[4:, 4:] == 1.0)
        assert np.all(np.diagonal(co) == 1.0)

    def test_single_run_rejected(self):
        net = net_from_weights(two_cliques(4))
        with pytest.raises(DataError):
            consensus_partition(net, gamma=1.0, runs=1, seed=1)

    def test_consensus_q_at_least_reference(self):
        for seed in range(3):
            w, truth = planted_partition_graph(48, 4, 0.45, 0.03, seed=seed + 20)
            net = net_from_weights(w)
            result = consensus_partition(net, gamma=1.0, runs=12, seed=seed)
            q_cons = modularity(net, result.partition)
            q_ref = modularity(net, part(truth))
            assert q_cons >= q_ref - 1e-9

    def test_signed_vs_positive_consensus_consistent(self):
        # negative edges between cliques should not break the clique structure
        rng = np.random.default_rng(8)
        w = two_cliques(5)
        for i in range(5):
            for j in range(5, 10):
                if rng.random() < 0.4:
                    w[i, j] = w[j, i] = -0.3
        signed_net = net_from_weights(w, signed=True)
        positive_net = net_from_weights(np.where(w > 0, w, 0.0))
        p_signed = consensus_partition(signed_net, 1.0, runs=10, seed=3).partition
        p_positive = consensus_partition(positive_net, 1.0, runs=10, seed=3).partition
        assert partition_jaccard(p_signed, p_positive) >= 0.8


class TestJaccard:
    def test_identical(self):
        p = part([1, 1, 2, 2])
        assert partition_jaccard(p, part([2, 2, 1, 1])) == 1.0

    def test_disjoint_co_pairs(self):
        assert partition_jaccard(part([1, 1, 2, 2]), part([1, 2, 1, 2])) == 0.0

    def test_singletons_vs_lump(self):
        assert partition_jaccard(part([1, 2, 3, 4]), part([1, 1, 1, 1])) == 0.0

    def test_symmetric(self):
        rng = np.random.default_rng(1)
        a = rng.integers(1, 4, size=12)
        b = rng.integers(1, 4, size=12)
        pa = part(np.unique(a, return_inverse=True)[1] + 1)
        pb = part(np.unique(b, return_inverse=True)[1] + 1)
        assert partition_jaccard(pa, pb) == partition_jaccard(pb, pa)

    def test_matches_pair_counting_oracle(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            a = rng.integers(1, 5, size=15)
            b = rng.integers(1, 5, size=15)
            pa = part(np.unique(a, return_inverse=True)[1] + 1)
            pb = part(np.unique(b, return_inverse=True)[1] + 1)
            assert partition_jaccard(pa, pb) == pytest.approx(
                pair_counting_jaccard(pa.labels, pb.labels), abs=1e-15
            )

    def test_node_count_mismatch(self):
        with pytest.raises(DataError):
            partition_jaccard(part([1, 2]), part([1, 2, 2]))


class TestSelectGamma:
    def test_two_clique_reference_smallest_gamma(self):
        w = two_cliques(4, bridge=0.5)
        net = net_from_weights(w)
        reference = part([1] * 4 + [2] * 4)
        sel = select_gamma(
            net, reference, grid=[0.8, 1.0, 1.2], runs_per_gamma=2, seed=4, consensus_runs=6
        )
        means = {g: m for g, m, _ in sel.curve}
        assert means[sel.gamma] == max(means.values())
        assert sel.gamma == min(g for g, m in means.items() if m == max(means.values()))
        assert means[1.0] == 1.0

    def test_single_point_grid(self):
        net = net_from_weights(two_cliques(4, bridge=0.5))
        reference = part([1] * 4 + [2] * 4)
        sel = select_gamma(net, reference, grid=[1.0], runs_per_gamma=2, seed=1, consensus_runs=4)
        assert sel.gamma == 1.0
        assert len(sel.curve) == 1

    def test_descending_grid_rejected(self):
        net = net_from_weights(two_cliques(4))
        with pytest.raises(DataError):
            select_gamma(net, part([1] * 8), grid=[1.0, 0.5], runs_per_gamma=1, seed=1)

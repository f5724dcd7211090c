import numpy as np
import pytest

from cooccurnet.corpus import TopicVocabulary
from cooccurnet.graphbuild import TopicNetwork

# Weights whose reciprocals are small multiples of 0.25 (1, 1.25, 2, 2.5, ...),
# so shortest-path sums are exact in float64 and tie counting is unambiguous.
DYADIC_GRID = np.array([1.0, 0.8, 0.5, 0.4, 0.25, 0.2, 0.125, 0.0625])


def net_from_weights(weights, signed=False, classifications=None) -> TopicNetwork:
    """Wrap a raw weight matrix in a TopicNetwork with a synthetic vocabulary."""
    w = np.asarray(weights, dtype=float)
    n = w.shape[0]
    vocab = TopicVocabulary(
        phrases=tuple(f"t{i:03d}" for i in range(n)),
        prevalence=tuple(1.0 - i / (2 * n) for i in range(n)),
        classifications=tuple(classifications) if classifications else (None,) * n,
    )
    return TopicNetwork(vocab=vocab, weights=w, signed=signed)


def symmetric(weights):
    w = np.asarray(weights, dtype=float)
    return np.triu(w, 1) + np.triu(w, 1).T


def path_graph(n, weight=1.0):
    w = np.zeros((n, n))
    for i in range(n - 1):
        w[i, i + 1] = w[i + 1, i] = weight
    return w


def complete_graph(n, weight=1.0):
    w = np.full((n, n), weight)
    np.fill_diagonal(w, 0.0)
    return w


def star_graph(n, weight=1.0):
    w = np.zeros((n, n))
    w[0, 1:] = weight
    w[1:, 0] = weight
    return w


def ring_lattice(n, k, weight=1.0):
    """Ring where each node connects to its k nearest neighbors (k even)."""
    w = np.zeros((n, n))
    for i in range(n):
        for d in range(1, k // 2 + 1):
            j = (i + d) % n
            w[i, j] = w[j, i] = weight
    return w


def random_dyadic_graph(n, p, seed):
    """G(n, p) with weights from a dyadic grid, so path sums are exact floats."""
    rng = np.random.default_rng(seed)
    w = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                w[i, j] = w[j, i] = rng.choice(DYADIC_GRID)
    return w


def two_disconnected_edges():
    w = np.zeros((4, 4))
    w[0, 1] = w[1, 0] = 1.0
    w[2, 3] = w[3, 2] = 1.0
    return w


@pytest.fixture(scope="session")
def fixture_graphs():
    """The <=12-node graphs every metric oracle runs against."""
    graphs = {
        "path3": path_graph(3),
        "path5": path_graph(5),
        "triangle": complete_graph(3),
        "star5": star_graph(5),
        "complete5": complete_graph(5),
        "two_edges": two_disconnected_edges(),
        "ring12_k4": ring_lattice(12, 4),
        "weighted_path4": path_graph(4, 0.5),
        "random10a": random_dyadic_graph(10, 0.45, seed=101),
        "random12b": random_dyadic_graph(12, 0.35, seed=202),
        "random9_sparse": random_dyadic_graph(9, 0.25, seed=303),
    }
    return graphs


def two_cliques(k=4, bridge=0.0):
    """Two unit-weight k-cliques, optionally joined by one bridge edge."""
    n = 2 * k
    w = np.zeros((n, n))
    w[:k, :k] = complete_graph(k)
    w[k:, k:] = complete_graph(k)
    if bridge:
        w[0, k] = w[k, 0] = bridge
    return w


def planted_partition_graph(n_nodes, n_blocks, p_in, p_out, seed, weight=1.0):
    rng = np.random.default_rng(seed)
    labels = np.repeat(np.arange(n_blocks), n_nodes // n_blocks)
    w = np.zeros((n_nodes, n_nodes))
    for i in range(n_nodes):
        for j in range(i + 1, n_nodes):
            p = p_in if labels[i] == labels[j] else p_out
            if rng.random() < p:
                w[i, j] = w[j, i] = weight
    return w, labels + 1

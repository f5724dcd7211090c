"""Node- and graph-level weighted network measures.

Shortest paths use the similarity-to-distance inversion d = 1/w. All
measures are total on disconnected graphs: unreachable pairs contribute
zero inverse distance to efficiency, and path length averages reachable
pairs while raising a flag.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import networkx as nx
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .errors import DataError
from .graphbuild import TopicNetwork
from .nulls import lattice_reference, random_reference
from .seeding import STREAM_SWP, derive_seed

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class NodeMetrics:
    degree: np.ndarray
    strength: np.ndarray
    betweenness: np.ndarray
    clustering: np.ndarray


@dataclass(frozen=True)
class SmallWorldResult:
    swp: float
    delta_c: float
    delta_l: float


@dataclass(frozen=True)
class GraphMetrics:
    efficiency: float
    path_length: float
    mean_clustering: float
    swp: float
    delta_c: float
    delta_l: float
    disconnected: bool


def degree_strength(net: TopicNetwork) -> tuple[np.ndarray, np.ndarray]:
    """Per-node degree (positive-weight neighbor count) and strength (weight sum)."""
    adj = net.weights > 0
    return adj.sum(axis=1).astype(np.int64), net.weights.sum(axis=1)


def shortest_path_lengths(net: TopicNetwork) -> np.ndarray:
    """All-pairs weighted distances over edge lengths 1/w; +inf when unreachable."""
    w = net.weights
    if np.any(w < 0):
        raise DataError("shortest paths require nonnegative weights")
    n = net.n_nodes
    iu, ju = np.nonzero(np.triu(w, k=1) > 0)
    lengths = 1.0 / w[iu, ju]
    graph = csr_matrix((np.concatenate([lengths, lengths]),
                        (np.concatenate([iu, ju]), np.concatenate([ju, iu]))),
                       shape=(n, n))
    return dijkstra(graph, directed=False)


def betweenness(net: TopicNetwork) -> np.ndarray:
    """Normalized betweenness over weighted shortest paths.

    b_i sums the fraction of shortest paths between every ordered pair
    (h, j) that pass through i, scaled by 1/((n-1)(n-2)). Unreachable pairs
    contribute nothing; tied shortest paths are counted exactly.
    """
    n = net.n_nodes
    if n < 3:
        raise DataError("betweenness requires at least 3 nodes")
    g = nx.Graph()
    g.add_nodes_from(range(n))
    iu, ju = np.nonzero(np.triu(net.weights, k=1) > 0)
    g.add_weighted_edges_from(
        (int(i), int(j), 1.0 / net.weights[i, j]) for i, j in zip(iu, ju)
    )
    scores = nx.betweenness_centrality(g, weight="weight", normalized=True)
    return np.array([scores[i] for i in range(n)])


def clustering_barrat(net: TopicNetwork) -> tuple[np.ndarray, float]:
    """Barrat weighted clustering per node and its mean over all nodes.

    c_i = sum_{j,h} (w_ij + w_ih)/2 * a_ij a_ih a_jh / (s_i (k_i - 1)),
    with c_i = 0 when k_i < 2 (no triangle can exist).
    """
    w = net.weights
    adj = (w > 0).astype(np.float64)
    degree = adj.sum(axis=1)
    strength = w.sum(axis=1)
    paths2 = adj @ adj
    numerator = np.einsum("ij,ij->i", w * adj, paths2 * adj)
    c = np.zeros(net.n_nodes)
    ok = degree >= 2
    c[ok] = numerator[ok] / (strength[ok] * (degree[ok] - 1))
    return c, float(c.mean())


def global_efficiency(net: TopicNetwork) -> float:
    """Mean inverse shortest path length; unreachable pairs contribute 0."""
    n = net.n_nodes
    if n < 2:
        raise DataError("efficiency requires at least 2 nodes")
    dist = shortest_path_lengths(net)
    with np.errstate(divide="ignore"):
        inv = 1.0 / dist
    np.fill_diagonal(inv, 0.0)
    inv[~np.isfinite(inv)] = 0.0
    return float(inv.sum() / (n * (n - 1)))


def path_length(net: TopicNetwork) -> tuple[float, bool]:
    """Mean shortest path length over reachable ordered pairs.

    Returns (L, disconnected_flag); the flag is set when any pair is
    unreachable, in which case the mean is over reachable pairs only.
    """
    n = net.n_nodes
    if n < 2:
        raise DataError("path length requires at least 2 nodes")
    dist = shortest_path_lengths(net)
    off = ~np.eye(n, dtype=bool)
    reachable = np.isfinite(dist) & off
    if not reachable.any():
        raise DataError("no reachable node pairs")
    disconnected = bool(reachable.sum() < off.sum())
    return float(dist[reachable].mean()), disconnected


def _clamp01(x: float) -> float:
    return min(1.0, max(0.0, x))


def small_world_propensity(net: TopicNetwork, seed: int) -> SmallWorldResult:
    """Small-world propensity against lattice and degree-matched random references.

    phi = 1 - sqrt((dC^2 + dL^2)/2), where dC is the clustering deficit
    relative to a lattice reference and dL the path-length excess relative
    to a random reference; both deltas are clamped to [0, 1]. Degenerate
    references (lattice and random coincide) zero the affected delta with
    a warning.
    """
    if net.n_nodes < 4:
        raise DataError("small-world propensity requires at least 4 nodes")
    if net.edge_count < 1:
        raise DataError("small-world propensity requires at least one edge")
    lattice = lattice_reference(net, derive_seed(seed, STREAM_SWP, 1))
    random = random_reference(net, derive_seed(seed, STREAM_SWP, 2))
    _, c_obs = clustering_barrat(net)
    _, c_latt = clustering_barrat(lattice)
    _, c_rand = clustering_barrat(random)
    l_obs, _ = path_length(net)
    l_latt, _ = path_length(lattice)
    l_rand, _ = path_length(random)
    if c_latt == c_rand:
        warnings.warn("degenerate clustering references; delta_c set to 0", stacklevel=2)
        delta_c = 0.0
    else:
        delta_c = _clamp01((c_latt - c_obs) / (c_latt - c_rand))
    if l_latt == l_rand:
        warnings.warn("degenerate path-length references; delta_l set to 0", stacklevel=2)
        delta_l = 0.0
    else:
        delta_l = _clamp01((l_obs - l_rand) / (l_latt - l_rand))
    swp = 1.0 - np.sqrt((delta_c**2 + delta_l**2) / 2.0)
    return SmallWorldResult(swp=float(swp), delta_c=delta_c, delta_l=delta_l)


def compute_node_metrics(net: TopicNetwork) -> NodeMetrics:
    degree, strength = degree_strength(net)
    clustering, _ = clustering_barrat(net)
    return NodeMetrics(
        degree=degree,
        strength=strength,
        betweenness=betweenness(net),
        clustering=clustering,
    )


def compute_graph_metrics(net: TopicNetwork, seed: int) -> GraphMetrics:
    _, mean_c = clustering_barrat(net)
    length, disconnected = path_length(net)
    sw = small_world_propensity(net, seed)
    return GraphMetrics(
        efficiency=global_efficiency(net),
        path_length=length,
        mean_clustering=mean_c,
        swp=sw.swp,
        delta_c=sw.delta_c,
        delta_l=sw.delta_l,
        disconnected=disconnected,
    )

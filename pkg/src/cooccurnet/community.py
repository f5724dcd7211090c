"""Modularity, Louvain-style maximization, consensus, and partition similarity.

Modularity follows the ordered-pair convention: l is the sum of the full
weight matrix and the null term is gamma * s_i * s_j / l. The signed form
keeps separate positive and negative null terms; a degenerate term (no
weights of that sign) is dropped.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .corpus import TopicVocabulary
from .errors import DataError
from .graphbuild import TopicNetwork
from .seeding import STREAM_CONSENSUS, STREAM_GAMMA, STREAM_LOUVAIN, derive_rng, derive_seed

log = logging.getLogger(__name__)

ORIGIN_CLASSIFICATION = "classification"
ORIGIN_DATA_DRIVEN = "data-driven"
ORIGIN_PLANTED = "planted"


@dataclass(frozen=True)
class Partition:
    """Community labels (contiguous integers from 1) with their origin."""

    labels: np.ndarray
    origin: str
    gamma: float | None = None
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        object.__setattr__(self, "labels", labels)
        if labels.ndim != 1 or labels.size == 0:
            raise DataError("partition labels must be a nonempty vector")
        uniq = np.unique(labels)
        if uniq[0] != 1 or uniq[-1] != len(uniq):
            raise DataError("community labels must be contiguous integers from 1")
        if self.names is not None and len(self.names) != len(uniq):
            raise DataError("names must align with community count")

    @property
    def n_communities(self) -> int:
        return int(self.labels.max())

    def canonical(self) -> tuple[int, ...]:
        """Relabeled by first appearance; equal iff partitions match up to relabeling."""
        mapping: dict[int, int] = {}
        out = []
        for lab in self.labels:
            mapping.setdefault(int(lab), len(mapping) + 1)
            out.append(mapping[int(lab)])
        return tuple(out)


@dataclass(frozen=True)
class ConsensusResult:
    partition: Partition
    coassignment: np.ndarray
    runs: int
    converged: bool


def classification_partition(vocab: TopicVocabulary) -> Partition:
    """Group topics by their assigned classification label."""
    if any(c is None for c in vocab.classifications):
        raise DataError("vocabulary has unclassified topics; run assign_classifications first")
    names = tuple(sorted(set(vocab.classifications)))
    index = {name: i + 1 for i, name in enumerate(names)}
    labels = np.array([index[c] for c in vocab.classifications], dtype=np.int64)
    return Partition(labels=labels, origin=ORIGIN_CLASSIFICATION, names=names)


def _split_signs(weights: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    wp = np.where(weights > 0, weights, 0.0)
    wn = np.where(weights < 0, -weights, 0.0)
    return wp, wn


def modularity(net: TopicNetwork, part: Partition, gamma: float = 1.0, signed: bool = False) -> float:
    """Quality Q of a partition, with the null term scaled by gamma."""
    if gamma <= 0:
        raise DataError("gamma must be positive")
    w = net.weights
    if part.labels.shape[0] != net.n_nodes:
        raise DataError("partition does not cover the network's nodes")
    if not signed and np.any(w < 0):
        raise DataError("network carries negative weights; use signed=True")
    wp, wn = _split_signs(w)
    lp, ln = float(wp.sum()), float(wn.sum())
    if lp + ln == 0:
        raise DataError("modularity undefined for an empty network")
    sp, sn = wp.sum(axis=1), wn.sum(axis=1)
    labels = part.labels
    q = 0.0
    for c in np.unique(labels):
        idx = labels == c
        q += wp[np.ix_(idx, idx)].sum() - wn[np.ix_(idx, idx)].sum()
        if lp > 0:
            q -= gamma * sp[idx].sum() ** 2 / lp
        if ln > 0:
            q += gamma * sn[idx].sum() ** 2 / ln
    return q / (lp + ln)


def _one_level(wp, wn, gamma, rng, labels):
    """Single-node sweeps until no reassignment improves Q; returns True if any move."""
    n = wp.shape[0]
    lp, ln = float(wp.sum()), float(wn.sum())
    sp, sn = wp.sum(axis=1), wn.sum(axis=1)
    comm_sp = np.bincount(labels, weights=sp, minlength=n)
    comm_sn = np.bincount(labels, weights=sn, minlength=n)
    sizes = np.bincount(labels, minlength=n)
    any_moved = False
    while True:
        moved = 0
        for i in rng.permutation(n):
            c0 = labels[i]
            sizes[c0] -= 1
            comm_sp[c0] -= sp[i]
            comm_sn[c0] -= sn[i]
            labels[i] = -1
            mask = labels >= 0
            to_p = np.bincount(labels[mask], weights=wp[i][mask], minlength=n)
            to_n = np.bincount(labels[mask], weights=wn[i][mask], minlength=n)
            cand = set(labels[(wp[i] > 0) | (wn[i] > 0)].tolist())
            cand.discard(-1)
            cand.add(int(c0))
            empties = np.flatnonzero(sizes == 0)
            if empties.size:
                cand.add(int(empties[0]))
            def gain_of(c):
                gain = 0.0
                if lp > 0:
                    gain += to_p[c] - gamma * sp[i] * comm_sp[c] / lp
                if ln > 0:
                    gain -= to_n[c] - gamma * sn[i] * comm_sn[c] / ln
                return gain

            # strictly-greater keeps ties on the smallest community id
            best_c, best_gain = int(c0), -np.inf
            for c in sorted(cand):
                gain = gain_of(c)
                if gain > best_gain:
                    best_gain, best_c = gain, c
            target = best_c if best_gain > gain_of(int(c0)) else int(c0)
            labels[i] = target
            sizes[target] += 1
            comm_sp[target] += sp[i]
            comm_sn[target] += sn[i]
            if target != c0:
                moved += 1
        if moved == 0:
            break
        any_moved = True
    return any_moved


def _matrix_modularity(wp, wn, gamma, labels) -> float:
    lp, ln = float(wp.sum()), float(wn.sum())
    sp, sn = wp.sum(axis=1), wn.sum(axis=1)
    q = 0.0
    for c in np.unique(labels):
        idx = labels == c
        q += wp[np.ix_(idx, idx)].sum() - wn[np.ix_(idx, idx)].sum()
        if lp > 0:
            q -= gamma * sp[idx].sum() ** 2 / lp
        if ln > 0:
            q += gamma * sn[idx].sum() ** 2 / ln
    return q / (lp + ln)


def _compress(labels: np.ndarray) -> np.ndarray:
    """Map labels to 0..K-1 preserving first-appearance order."""
    mapping: dict[int, int] = {}
    out = np.empty_like(labels)
    for i, lab in enumerate(labels):
        mapping.setdefault(int(lab), len(mapping))
        out[i] = mapping[int(lab)]
    return out


def _aggregate(wp, wn, labels):
    k = int(labels.max()) + 1
    onehot = np.zeros((wp.shape[0], k))
    onehot[np.arange(wp.shape[0]), labels] = 1.0
    return onehot.T @ wp @ onehot, onehot.T @ wn @ onehot


def _louvain_matrix(wp, wn, gamma, rng) -> np.ndarray:
    """Louvain with aggregation and node-level refinement; 0-based labels.

    Alternates single-node sweeps on the original graph (warm-started from
    the current assignment) with sweeps on the community-aggregated graph,
    until neither phase improves Q.
    """
    n = wp.shape[0]
    mapping = np.arange(n)
    q_best = _matrix_modularity(wp, wn, gamma, mapping)
    while True:
        improved = False
        labels = mapping.copy()
        if _one_level(wp, wn, gamma, rng, labels):
            labels = _compress(labels)
            q = _matrix_modularity(wp, wn, gamma, labels)
            if q > q_best + 1e-12:
                mapping, q_best, improved = labels, q, True
        agg_wp, agg_wn = _aggregate(wp, wn, mapping)
        meta = np.arange(agg_wp.shape[0])
        if _one_level(agg_wp, agg_wn, gamma, rng, meta):
            projected = _compress(_compress(meta)[mapping])
            q = _matrix_modularity(wp, wn, gamma, projected)
            if q > q_best + 1e-12:
                mapping, q_best, improved = projected, q, True
        if not improved:
            return _compress(mapping)


def louvain_partition(net: TopicNetwork, gamma: float, seed: int) -> Partition:
    """Locally greedy modularity maximization; sweep order is seeded."""
    if gamma <= 0:
        raise DataError("gamma must be positive")
    if not np.any(net.weights != 0):
        raise DataError("louvain requires a network with at least one edge")
    rng = derive_rng(seed, STREAM_LOUVAIN)
    wp, wn = _split_signs(net.weights)
    labels = _louvain_matrix(wp, wn, gamma, rng)
    return Partition(labels=labels + 1, origin=ORIGIN_DATA_DRIVEN, gamma=gamma)


def _coassignment(partitions: list[Partition]) -> np.ndarray:
    n = partitions[0].labels.shape[0]
    co = np.zeros((n, n))
    for part in partitions:
        co += part.labels[:, None] == part.labels[None, :]
    return co / len(partitions)


def consensus_partition(net: TopicNetwork, gamma: float, runs: int, seed: int) -> ConsensusResult:
    """Consensus over repeated Louvain runs.

    Runs are reclustered through their coassignment matrix (entries below
    the mean off-diagonal fraction dropped) until every run agrees, with a
    cap of 10 meta-iterations.
    """
    if runs < 2:
        raise DataError("consensus requires runs >= 2")
    base = [
        louvain_partition(net, gamma, derive_seed(seed, STREAM_CONSENSUS, 0, r))
        for r in range(runs)
    ]
    coassignment = _coassignment(base)
    partitions = base
    converged = False
    for meta in range(10):
        forms = {p.canonical() for p in partitions}
        if len(forms) == 1:
            converged = True
            break
        matrix = _coassignment(partitions)
        off = matrix[~np.eye(matrix.shape[0], dtype=bool)]
        threshold = off.mean()
        pruned = np.where(matrix >= threshold, matrix, 0.0)
        np.fill_diagonal(pruned, 0.0)
        if not np.any(pruned > 0):
            log.warning("consensus coassignment emptied by thresholding; keeping best run")
            break
        partitions = [
            Partition(
                labels=_louvain_matrix(
                    pruned, np.zeros_like(pruned), gamma,
                    derive_rng(seed, STREAM_CONSENSUS, meta + 1, r),
                ) + 1,
                origin=ORIGIN_DATA_DRIVEN,
                gamma=gamma,
            )
            for r in range(runs)
        ]
    if converged:
        final = partitions[0]
    else:
        qs = [modularity(net, p, gamma, signed=net.signed) for p in partitions]
        final = partitions[int(np.argmax(qs))]
    final = Partition(
        labels=np.asarray(final.canonical(), dtype=np.int64),
        origin=ORIGIN_DATA_DRIVEN,
        gamma=gamma,
    )
    return ConsensusResult(
        partition=final, coassignment=coassignment, runs=runs, converged=converged
    )


def partition_jaccard(p1: Partition, p2: Partition) -> float:
    """Pair-counting Jaccard: co-pairs shared / co-pairs in either partition."""
    if p1.labels.shape[0] != p2.labels.shape[0]:
        raise DataError("partitions cover different node sets")
    a, b = p1.labels, p2.labels
    k1, k2 = a.max() + 1, b.max() + 1
    contingency = np.zeros((k1, k2), dtype=np.int64)
    np.add.at(contingency, (a, b), 1)

    def pairs(counts):
        return (counts * (counts - 1) // 2).sum()

    n11 = pairs(contingency)
    pairs1 = pairs(np.bincount(a))
    pairs2 = pairs(np.bincount(b))
    denom = pairs1 + pairs2 - n11
    return float(n11 / denom) if denom else 0.0


@dataclass(frozen=True)
class GammaSelection:
    gamma: float
    curve: list[tuple[float, float, float]]  # (gamma, mean_jaccard, sd_jaccard)


def select_gamma(
    net: TopicNetwork,
    reference: Partition,
    grid,
    runs_per_gamma: int,
    seed: int,
    consensus_runs: int = 20,
) -> GammaSelection:
    """Pick the resolution maximizing mean Jaccard similarity to a reference.

    Each grid value is scored by ``runs_per_gamma`` independent consensus
    partitions; ties go to the smallest gamma.
    """
    grid = list(grid)
    if not grid:
        raise DataError("gamma grid is empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise DataError("gamma grid must be strictly ascending")
    curve = []
    best_gamma, best_mean = None, -np.inf
    for gi, gamma in enumerate(grid):
        scores = []
        for r in range(runs_per_gamma):
            result = consensus_partition(
                net, gamma, consensus_runs, derive_seed(seed, STREAM_GAMMA, gi, r)
            )
            scores.append(partition_jaccard(result.partition, reference))
        mean = float(np.mean(scores))
        sd = float(np.std(scores, ddof=1)) if len(scores) > 1 else 0.0
        curve.append((float(gamma), mean, sd))
        if mean > best_mean:
            best_mean, best_gamma = mean, float(gamma)
    return GammaSelection(gamma=best_gamma, curve=curve)


DEFAULT_GAMMA_GRID = [round(0.5 + 0.05 * i, 2) for i in range(31)]

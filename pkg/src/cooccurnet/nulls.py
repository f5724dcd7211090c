"""Reference and null models.

Degree- and strength-matched rewiring, the ring-lattice reference used by
small-world propensity, temporal corpus permutation, and z-standardization
of measure trajectories against a null ensemble.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .corpus import Corpus, Document, format_month
from .errors import DataError, NumericError
from .graphbuild import TopicNetwork
from .seeding import STREAM_LATTICE, STREAM_REWIRE, derive_rng, derive_seed
from .trajectories import MeasureTrajectory

log = logging.getLogger(__name__)

DEFAULT_SWAPS_PER_EDGE = 10
STRENGTH_TOLERANCE = 0.05


@dataclass
class NullEnsemble:
    """A family of null networks (or trajectories) from one generator."""

    members: list
    generator: str
    base_seed: int
    preservation_report: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.members)


def _edge_list(weights: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    iu, ju = np.nonzero(np.triu(weights, k=1) > 0)
    return iu, ju, weights[iu, ju]


def _weights_from_edges(n: int, iu, ju, w) -> np.ndarray:
    out = np.zeros((n, n))
    out[iu, ju] = w
    out[ju, iu] = w
    return out


def _double_edge_swaps(edges: np.ndarray, n: int, rng: np.random.Generator, target_swaps: int):
    """In-place degree-preserving rewiring by double-edge swaps."""
    e = len(edges)
    pairs = [(int(a), int(b)) for a, b in edges]
    edge_set = set(pairs)
    swaps = 0
    attempts = 0
    max_attempts = max(20 * target_swaps, 100)
    while swaps < target_swaps and attempts < max_attempts:
        chunk = min(8192, max_attempts - attempts)
        picks = rng.integers(0, e, size=(chunk, 2)).tolist()
        flips = rng.integers(0, 2, size=chunk).tolist()
        for (e1, e2), flip in zip(picks, flips):
            attempts += 1
            if e1 == e2:
                continue
            a, b = pairs[e1]
            c, d = pairs[e2]
            if flip:
                c, d = d, c
            # propose (a, c), (b, d)
            if a == c or a == d or b == c or b == d:
                continue
            new1 = (a, c) if a < c else (c, a)
            new2 = (b, d) if b < d else (d, b)
            if new1 in edge_set or new2 in edge_set:
                continue
            edge_set.discard(pairs[e1])
            edge_set.discard(pairs[e2])
            edge_set.add(new1)
            edge_set.add(new2)
            pairs[e1] = new1
            pairs[e2] = new2
            swaps += 1
            if swaps >= target_swaps:
                break
    edges[:, 0] = [p[0] for p in pairs]
    edges[:, 1] = [p[1] for p in pairs]
    if swaps < target_swaps:
        log.debug("rewiring saturated after %d/%d swaps", swaps, target_swaps)


def _rank_match_weights(
    edges: np.ndarray, weights_pool: np.ndarray, target_strength: np.ndarray,
    degrees: np.ndarray, rng: np.random.Generator,
) -> np.ndarray:
    """Assign the weight multiset to edges, heaviest onto highest-pressure edges."""
    per_edge_target = np.zeros(len(edges))
    for k, (u, v) in enumerate(edges):
        per_edge_target[k] = 0.5 * (target_strength[u] / degrees[u] + target_strength[v] / degrees[v])
    jitter = rng.permutation(len(edges))  # random tie-break among equal-pressure edges
    edge_order = np.lexsort((jitter, -per_edge_target))
    assigned = np.empty(len(edges))
    assigned[edge_order] = np.sort(weights_pool)[::-1]
    return assigned


def _strength_repair(
    edges: np.ndarray, w: np.ndarray, target: np.ndarray, n: int,
    rng: np.random.Generator, tolerance: float, max_rounds: int = 80,
) -> float:
    """Greedy weight swaps toward the original per-node strengths.

    Minimizes the sum of squared relative strength errors, so low-strength
    nodes are not neglected, and stops at the tolerance or on a plateau.
    Returns the final maximum relative error over nodes with nonzero
    target strength. Exact tolerance is not always feasible on small
    sparse graphs; the achieved error is logged by the caller.
    """
    e = len(edges)
    u = edges[:, 0].tolist()
    v = edges[:, 1].tolist()
    wl = w.tolist()
    tl = target.tolist()
    scale = [1.0 / t if t > 0 else 0.0 for t in tl]
    s = [0.0] * n
    for k in range(e):
        s[u[k]] += wl[k]
        s[v[k]] += wl[k]

    def max_rel_err():
        return max(
            (abs(sv - tv) * sc for sv, tv, sc in zip(s, tl, scale) if sc > 0.0),
            default=0.0,
        )

    err = max_rel_err()
    if err <= tolerance or e < 2:
        return err

    incident: list[list[int]] = [[] for _ in range(n)]
    for k in range(e):
        incident[u[k]].append(k)
        incident[v[k]].append(k)

    objective = sum(((sv - tv) * sc) ** 2 for sv, tv, sc in zip(s, tl, scale))

    def try_swap(i: int, j: int) -> float:
        """Swap weights of edges i and j if it lowers the objective; return the gain."""
        if i == j:
            return 0.0
        wi, wj = wl[i], wl[j]
        if wi == wj:
            return 0.0
        delta = wj - wi
        ui, vi, uj, vj = u[i], v[i], u[j], v[j]
        dsq = 0.0
        for node in (ui, vi):
            if node != uj and node != vj and scale[node] > 0.0:
                base = (s[node] - tl[node]) * scale[node]
                new = base + delta * scale[node]
                dsq += new * new - base * base
        for node in (uj, vj):
            if node != ui and node != vi and scale[node] > 0.0:
                base = (s[node] - tl[node]) * scale[node]
                new = base - delta * scale[node]
                dsq += new * new - base * base
        if dsq >= -1e-18:
            return 0.0
        for node in (ui, vi):
            if node != uj and node != vj:
                s[node] += delta
        for node in (uj, vj):
            if node != ui and node != vi:
                s[node] -= delta
        wl[i], wl[j] = wj, wi
        return -dsq

    batch = max(128, 2 * e)
    for _ in range(max_rounds):
        gained = 0.0
        for i, j in rng.integers(0, e, size=(batch, 2)).tolist():
            gained += try_swap(i, j)
        # targeted pass: give the worst nodes first pick of swap partners
        rel = [abs(sv - tv) * sc for sv, tv, sc in zip(s, tl, scale)]
        worst = sorted(range(n), key=rel.__getitem__, reverse=True)[: max(4, n // 10)]
        candidates = rng.integers(0, e, size=48).tolist()
        for node in worst:
            if rel[node] <= tolerance:
                break
            for i in incident[node]:
                for j in candidates:
                    gained += try_swap(i, j)
        err = max_rel_err()
        if err <= tolerance:
            break
        if gained <= 1e-9 * max(objective, 1e-12):
            break
        objective = max(objective - gained, 0.0)
    w[:] = wl
    return err


def rewire_preserving(
    net: TopicNetwork,
    seed: int,
    swaps_per_edge: int = DEFAULT_SWAPS_PER_EDGE,
    tolerance: float = STRENGTH_TOLERANCE,
) -> TopicNetwork:
    """Degree-preserving rewire with approximate strength preservation.

    Topology is randomized by double-edge swaps (degree sequence exact);
    the original weight multiset is then re-placed by strength rank
    matching plus greedy swap repair until every node strength sits within
    the relative tolerance. Complete graphs skip the topology phase and
    only permute weights.
    """
    rng = derive_rng(seed, STREAM_REWIRE)
    n = net.n_nodes
    iu, ju, w_pool = _edge_list(net.weights)
    e = len(iu)
    if e == 0:
        raise DataError("cannot rewire a network with no edges")
    edges = np.column_stack([iu, ju]).astype(np.int64)
    complete = e == n * (n - 1) // 2
    if not complete:
        independent = any(
            len({iu[a], ju[a], iu[b], ju[b]}) == 4 for a in range(min(e, 50)) for b in range(a + 1, e)
        )
        if not independent:
            raise DataError("rewiring requires two edges with no shared endpoint")
        _double_edge_swaps(edges, n, rng, target_swaps=swaps_per_edge * e)
    degrees = np.zeros(n, dtype=np.int64)
    np.add.at(degrees, edges[:, 0], 1)
    np.add.at(degrees, edges[:, 1], 1)
    target = net.weights.sum(axis=1)
    w = _rank_match_weights(edges, w_pool, target, np.maximum(degrees, 1), rng)
    if np.unique(w_pool).size > 1:
        err = _strength_repair(edges, w, target, n, rng, tolerance)
        if err > tolerance:
            log.debug("strength repair stopped at %.2f%% relative error", 100 * err)
    weights = _weights_from_edges(n, edges[:, 0], edges[:, 1], w)
    return net.with_weights(weights)


def random_reference(net: TopicNetwork, seed: int) -> TopicNetwork:
    """Degree- and strength-matched randomization (the L_random reference)."""
    return rewire_preserving(net, seed)


def lattice_reference(net: TopicNetwork, seed: int) -> TopicNetwork:
    """Ring-lattice reference with the observed edge count and weight multiset.

    Nodes are placed on a randomized ring; edges fill the smallest circular
    distances first, and the observed weights are assigned in descending
    order to edges of ascending circular distance, which concentrates
    weight locally (the C_lattice reference).
    """
    n = net.n_nodes
    if n < 4:
        raise DataError("lattice reference requires at least 4 nodes")
    _, _, w_pool = _edge_list(net.weights)
    e = len(w_pool)
    if e > n * (n - 1) // 2:
        raise DataError("edge count exceeds complete graph")
    rng = derive_rng(seed, STREAM_LATTICE)
    position_of = rng.permutation(n)  # node -> ring position
    node_at = np.argsort(position_of)  # ring position -> node
    slots: list[tuple[int, int]] = []
    for dist in range(1, n // 2 + 1):
        count = n if dist < n / 2 else n // 2
        for p in range(count):
            slots.append((p, (p + dist) % n))
        if len(slots) >= e:
            break
    weights = np.zeros((n, n))
    for k, w in enumerate(np.sort(w_pool)[::-1][:e]):
        a, b = slots[k]
        i, j = node_at[a], node_at[b]
        weights[i, j] = w
        weights[j, i] = w
    return net.with_weights(weights)


def permute_corpus_temporal(corpus: Corpus, seed: int) -> Corpus:
    """Re-pair document contents with publication dates uniformly at random.

    Content and date multisets are both preserved; only their pairing is
    randomized, which destroys real temporal structure.
    """
    rng = derive_rng(seed, 0)
    perm = temporal_permutation(len(corpus), rng)
    months = [corpus.documents[k].month for k in perm]
    docs = [
        Document(
            id=doc.id,
            month=months[i],
            classifications=doc.classifications,
            abstract=doc.abstract,
            keywords=doc.keywords,
        )
        for i, doc in enumerate(corpus.documents)
    ]
    return Corpus.from_documents(docs)


def temporal_permutation(n: int, rng: np.random.Generator) -> np.ndarray:
    """The date-assignment permutation shared by corpus- and index-level nulls."""
    return rng.permutation(n)


def standardize_trajectory(
    observed: MeasureTrajectory, nulls: list[MeasureTrajectory]
) -> MeasureTrajectory:
    """Per-window z-scores of the observed series against the null ensemble."""
    if len(nulls) < 2:
        raise DataError("standardization requires at least 2 null trajectories")
    for traj in nulls:
        if traj.centers != observed.centers:
            raise DataError("null trajectory centers are not aligned with the observed series")
    null_values = np.vstack([t.values for t in nulls])
    mean = null_values.mean(axis=0)
    sd = null_values.std(axis=0, ddof=1)
    zero = np.flatnonzero(sd == 0)
    if zero.size:
        raise NumericError(
            f"null ensemble has zero variance at window {format_month(observed.centers[zero[0]])}"
        )
    return MeasureTrajectory(
        centers=observed.centers,
        values=(observed.values - mean) / sd,
        label=observed.label,
        standardized=True,
    )


def rewire_ensemble(
    net: TopicNetwork,
    count: int,
    base_seed: int,
    swaps_per_edge: int = DEFAULT_SWAPS_PER_EDGE,
) -> NullEnsemble:
    """Independent rewired nulls with per-member derived seeds."""
    if count < 1:
        raise DataError("ensemble count must be >= 1")
    members = [
        rewire_preserving(net, derive_seed(base_seed, STREAM_REWIRE, k), swaps_per_edge)
        for k in range(count)
    ]
    target = net.weights.sum(axis=1)
    active = target > 0
    max_err = 0.0
    for member in members:
        s = member.weights.sum(axis=1)
        if active.any():
            max_err = max(max_err, float(np.max(np.abs(s[active] - target[active]) / target[active])))
    fingerprints = {hash(m.weights.tobytes()) for m in members}
    if len(fingerprints) < len(members) and net.edge_count >= 10:
        log.warning("null ensemble contains duplicate members")
    return NullEnsemble(
        members=members,
        generator="rewire",
        base_seed=base_seed,
        preservation_report={
            "max_strength_error": max_err,
            "degree_exact": True,
            "distinct_members": len(fingerprints),
        },
    )

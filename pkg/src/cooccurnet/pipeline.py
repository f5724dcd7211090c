"""Windowed trajectory computation and temporal null ensembles.

A CorpusIndex caches the document-by-candidate incidence matrix, which
depends only on document contents. Temporal nulls re-pair dates with
contents, so every null member shares the cached incidence and differs
only in its month vector; window networks then reduce to row slices and
matrix products.
"""

from __future__ import annotations

import logging
import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .community import classification_partition
from .corpus import Corpus, TopicVocabulary, UNCLASSIFIED
from .errors import DataError
from .graphbuild import TopicNetwork, WindowSpec, corpus_fingerprint, phi_matrix, window_centers
from .metrics import small_world_propensity
from .nulls import standardize_trajectory, temporal_permutation
from .scoring import partition_deviance
from .seeding import STREAM_TEMPORAL_NULL, STREAM_WINDOW, derive_rng, derive_seed
from .trajectories import MeasureTrajectory

log = logging.getLogger(__name__)

MEASURES = ("strength", "swp", "deviance", "xi")


@dataclass(frozen=True)
class CorpusIndex:
    """Content-derived arrays shared across temporal permutations."""

    doc_ids: tuple[str, ...]
    months: np.ndarray
    candidates: tuple[str, ...]
    incidence: np.ndarray  # (D, P) bool
    label_names: tuple[str, ...]
    label_onehot: np.ndarray  # (D, L) bool
    fingerprint: str

    @classmethod
    def build(cls, corpus: Corpus) -> "CorpusIndex":
        candidates = tuple(sorted(set().union(*(d.normalized_keywords() for d in corpus.documents))))
        if not candidates:
            raise DataError("corpus has no keyword-derived candidate topics")
        docs = corpus.documents
        incidence = np.zeros((len(docs), len(candidates)), dtype=bool)
        for i, doc in enumerate(docs):
            for j, phrase in enumerate(candidates):
                incidence[i, j] = doc.contains(phrase)
        label_names = tuple(sorted({c for d in docs for c in d.classifications}))
        label_index = {name: k for k, name in enumerate(label_names)}
        onehot = np.zeros((len(docs), len(label_names)), dtype=bool)
        for i, doc in enumerate(docs):
            for c in doc.classifications:
                onehot[i, label_index[c]] = True
        return cls(
            doc_ids=tuple(d.id for d in docs),
            months=np.array([d.month for d in docs], dtype=np.int64),
            candidates=candidates,
            incidence=incidence,
            label_names=label_names,
            label_onehot=onehot,
            fingerprint=corpus_fingerprint(corpus),
        )

    @property
    def span(self) -> tuple[int, int]:
        return int(self.months.min()), int(self.months.max())

    def with_months(self, months: np.ndarray) -> "CorpusIndex":
        return replace(self, months=np.asarray(months, dtype=np.int64))

    def permuted(self, seed: int) -> "CorpusIndex":
        """Temporal null member: contents keep their rows, dates re-paired."""
        perm = temporal_permutation(len(self.doc_ids), derive_rng(seed, 0))
        return self.with_months(self.months[perm])


def window_vocabulary(index: CorpusIndex, rows: np.ndarray, n: int) -> tuple[TopicVocabulary, np.ndarray]:
    """Top-n vocabulary within the windowed rows, with modal classifications."""
    sub = index.incidence[rows]
    prevalence = sub.mean(axis=0)
    positive = int(np.count_nonzero(prevalence > 0))
    if positive < n:
        raise DataError(f"requested {n} topics but only {positive} candidates have positive prevalence")
    phrases = np.array(index.candidates)
    order = np.lexsort((phrases, -prevalence))[:n]
    counts = sub[:, order].T.astype(np.int64) @ index.label_onehot[rows].astype(np.int64)
    labels = []
    for row in counts:
        if row.sum() == 0:
            labels.append(UNCLASSIFIED)
        else:
            labels.append(index.label_names[int(np.argmax(row))])
    vocab = TopicVocabulary(
        phrases=tuple(phrases[order]),
        prevalence=tuple(float(p) for p in prevalence[order]),
        classifications=tuple(labels),
    )
    return vocab, order


def window_network(index: CorpusIndex, center: int, half_width: int, n: int) -> TopicNetwork:
    """The phi network of one window, bit-identical to the corpus-object path."""
    rows = np.flatnonzero(
        (index.months >= center - half_width) & (index.months <= center + half_width)
    )
    if rows.size == 0:
        raise DataError("window contains no documents")
    vocab, order = window_vocabulary(index, rows, n)
    phi, _ = phi_matrix(index.incidence[np.ix_(rows, order)])
    phi = np.where(phi > 0, phi, 0.0)
    np.fill_diagonal(phi, 0.0)
    phi = np.minimum(phi, 1.0)
    return TopicNetwork(
        vocab=vocab,
        weights=phi,
        window=(center, half_width),
        provenance=index.fingerprint,
    )


@dataclass(frozen=True)
class WindowRecord:
    center: int
    n_docs: int
    n_edges: int


@dataclass(frozen=True)
class TrajectoryBundle:
    trajectories: dict[str, MeasureTrajectory]
    windows: list[WindowRecord]


def window_measures(net: TopicNetwork, swp_seed: int, measures=MEASURES) -> dict[str, float]:
    out: dict[str, float] = {}
    if "strength" in measures:
        out["strength"] = float(net.weights.sum() / net.n_nodes)
    need_swp = "swp" in measures or "xi" in measures
    need_dev = "deviance" in measures or "xi" in measures
    swp = small_world_propensity(net, swp_seed).swp if need_swp else None
    if need_dev:
        _, per_edge = partition_deviance(net, classification_partition(net.vocab))
        deviance = float(per_edge.mean()) if per_edge.size else 0.0
    if "swp" in measures:
        out["swp"] = swp
    if "deviance" in measures:
        out["deviance"] = deviance
    if "xi" in measures:
        out["xi"] = swp * deviance
    return out


def compute_trajectories(
    index: CorpusIndex,
    spec: WindowSpec,
    n: int,
    seed: int,
    member: int = 0,
    measures=MEASURES,
) -> TrajectoryBundle:
    """Measure series over all windows for one corpus version (observed or null)."""
    first, last = index.span
    width = 2 * spec.half_width + 1
    if last - first + 1 < width:
        raise DataError(
            f"corpus span of {last - first + 1} months cannot fit a window of {width} months"
        )
    centers = list(range(first + spec.half_width, last - spec.half_width + 1, spec.step))
    series: dict[str, list[float]] = {m: [] for m in measures}
    windows: list[WindowRecord] = []
    for pos, center in enumerate(centers):
        net = window_network(index, center, spec.half_width, n)
        values = window_measures(net, derive_seed(seed, STREAM_WINDOW, member, pos), measures)
        for m in measures:
            series[m].append(values[m])
        n_docs = int(
            np.count_nonzero(
                (index.months >= center - spec.half_width)
                & (index.months <= center + spec.half_width)
            )
        )
        windows.append(WindowRecord(center=center, n_docs=n_docs, n_edges=net.edge_count))
    trajectories = {
        m: MeasureTrajectory(centers=tuple(centers), values=np.array(series[m]), label=m)
        for m in measures
    }
    return TrajectoryBundle(trajectories=trajectories, windows=windows)


def _null_member(args) -> TrajectoryBundle:
    index, spec, n, seed, member, measures = args
    member_seed = derive_seed(seed, STREAM_TEMPORAL_NULL, member)
    permuted = index.permuted(member_seed)
    return compute_trajectories(permuted, spec, n, seed, member=member, measures=measures)


def null_trajectory_ensemble(
    index: CorpusIndex,
    spec: WindowSpec,
    n: int,
    count: int,
    seed: int,
    measures=MEASURES,
    workers: int = 1,
) -> list[TrajectoryBundle]:
    """Temporal-permutation null trajectories with per-member derived seeds."""
    tasks = [(index, spec, n, seed, k, measures) for k in range(1, count + 1)]
    if workers <= 1:
        return [_null_member(t) for t in tasks]
    context = multiprocessing.get_context("fork")
    with ProcessPoolExecutor(max_workers=workers, mp_context=context) as pool:
        return list(pool.map(_null_member, tasks))


@dataclass(frozen=True)
class TemporalAnalysis:
    observed: TrajectoryBundle
    nulls: list[TrajectoryBundle]
    standardized: dict[str, MeasureTrajectory]

    def null_series(self, measure: str) -> list[MeasureTrajectory]:
        return [b.trajectories[measure] for b in self.nulls]

    def standardized_null_series(self, measure: str) -> list[MeasureTrajectory]:
        """Each null member standardized against the full ensemble."""
        nulls = self.null_series(measure)
        return [standardize_trajectory(t, nulls) for t in nulls]


def temporal_analysis(
    index: CorpusIndex,
    spec: WindowSpec,
    n: int,
    null_count: int,
    seed: int,
    measures=MEASURES,
    workers: int = 1,
) -> TemporalAnalysis:
    observed = compute_trajectories(index, spec, n, seed, member=0, measures=measures)
    nulls = null_trajectory_ensemble(index, spec, n, null_count, seed, measures, workers)
    standardized = {
        m: standardize_trajectory(observed.trajectories[m], [b.trajectories[m] for b in nulls])
        for m in measures
    }
    return TemporalAnalysis(observed=observed, nulls=nulls, standardized=standardized)

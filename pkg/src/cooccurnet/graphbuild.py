"""Construction of weighted topic networks from document incidence.

Edge weights are the phi coefficient of binary association between topic
occurrence indicators (Pearson correlation of the binary columns).
Negative and undefined correlations are set to zero, leaving a symmetric
weight matrix in [0, 1] with a zero diagonal.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field

import numpy as np

from .corpus import Corpus, TopicVocabulary, assign_classifications, format_month, select_vocabulary
from .errors import DataError, NumericError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class IncidenceMatrix:
    """Binary document-by-topic occurrence indicators."""

    doc_ids: tuple[str, ...]
    phrases: tuple[str, ...]
    cells: np.ndarray  # shape (D, N), dtype bool

    def __post_init__(self):
        if self.cells.shape != (len(self.doc_ids), len(self.phrases)):
            raise DataError("incidence shape does not match labels")


@dataclass(frozen=True)
class WindowSpec:
    """Sliding-window geometry: center month, half-width, and step, all in months."""

    center: int | None = None
    half_width: int = 6
    step: int = 1

    def __post_init__(self):
        if self.half_width < 1:
            raise DataError("half_width must be >= 1")
        if self.step < 1:
            raise DataError("step must be >= 1")

    @property
    def width(self) -> int:
        return 2 * self.half_width + 1


@dataclass(frozen=True)
class TopicNetwork:
    """Symmetric weighted graph over a topic vocabulary.

    ``window`` is (center month, half-width) for windowed builds, None for
    the full span. ``signed`` marks networks that kept negative phi values
    for sensitivity checks; the standard artifact has weights in [0, 1].
    """

    vocab: TopicVocabulary
    weights: np.ndarray
    window: tuple[int, int] | None = None
    provenance: str = ""
    signed: bool = False

    def __post_init__(self):
        w = self.weights
        n = self.vocab.size
        if w.shape != (n, n):
            raise DataError(f"weight matrix shape {w.shape} does not match {n} topics")
        if not np.allclose(w, w.T, atol=0, rtol=0):
            raise DataError("weight matrix must be symmetric")
        if np.any(np.diagonal(w) != 0):
            raise DataError("weight matrix must have a zero diagonal")
        lo = -1.0 if self.signed else 0.0
        if w.min() < lo - 1e-12 or w.max() > 1.0 + 1e-12:
            raise DataError("edge weights out of range")

    @property
    def n_nodes(self) -> int:
        return self.vocab.size

    @property
    def edge_count(self) -> int:
        return int(np.count_nonzero(np.triu(self.weights, k=1) > 0))

    def positive_part(self) -> "TopicNetwork":
        if not self.signed:
            return self
        return TopicNetwork(
            vocab=self.vocab,
            weights=np.where(self.weights > 0, self.weights, 0.0),
            window=self.window,
            provenance=self.provenance,
            signed=False,
        )

    def with_weights(self, weights: np.ndarray, signed: bool | None = None) -> "TopicNetwork":
        return TopicNetwork(
            vocab=self.vocab,
            weights=weights,
            window=self.window,
            provenance=self.provenance,
            signed=self.signed if signed is None else signed,
        )


def corpus_fingerprint(corpus: Corpus) -> str:
    """Order-independent digest of (id, month, abstract, keywords) tuples."""
    digest = hashlib.sha256()
    for doc in sorted(corpus.documents, key=lambda d: d.id):
        digest.update(
            repr((doc.id, doc.month, doc.abstract, doc.keywords, doc.classifications)).encode()
        )
    return digest.hexdigest()[:16]


def build_incidence(corpus: Corpus, vocab: TopicVocabulary) -> IncidenceMatrix:
    """Binary occurrence matrix using the corpus matching rule."""
    cells = np.zeros((len(corpus), vocab.size), dtype=bool)
    for i, doc in enumerate(corpus.documents):
        for j, phrase in enumerate(vocab.phrases):
            cells[i, j] = doc.contains(phrase)
    empty = np.flatnonzero(~cells.any(axis=0))
    if empty.size:
        missing = ", ".join(vocab.phrases[j] for j in empty[:5])
        raise DataError(f"vocabulary topic(s) absent from every document: {missing}")
    return IncidenceMatrix(
        doc_ids=tuple(d.id for d in corpus.documents),
        phrases=vocab.phrases,
        cells=cells,
    )


def phi_coefficient(x, y) -> float:
    """Phi association of two binary vectors.

    phi = (n11*n00 - n10*n01) / sqrt(n1.*n0.*n.1*n.0), identical to the
    Pearson correlation of the indicators. Constant vectors have no
    defined correlation and raise.
    """
    x = np.asarray(x, dtype=bool)
    y = np.asarray(y, dtype=bool)
    if x.shape != y.shape or x.ndim != 1:
        raise DataError("phi requires two equal-length vectors")
    d = x.size
    if d < 2:
        raise DataError("phi requires length >= 2")
    cx, cy = int(x.sum()), int(y.sum())
    if cx in (0, d) or cy in (0, d):
        raise NumericError("phi undefined for a constant vector")
    n11 = int(np.count_nonzero(x & y))
    num = d * n11 - cx * cy
    den = np.sqrt(float(cx) * (d - cx) * cy * (d - cy))
    return float(num / den)


def phi_matrix(cells: np.ndarray) -> tuple[np.ndarray, int]:
    """Pairwise phi over incidence columns.

    Returns (matrix, undefined_pairs). Entries whose correlation is
    undefined (a constant column) are set to 0, the same treatment as
    negative correlations downstream. Diagonal is 0.
    """
    x = np.asarray(cells, dtype=np.float64)
    d, n = x.shape
    counts = x.sum(axis=0)
    n11 = x.T @ x
    num = d * n11 - np.outer(counts, counts)
    var = counts * (d - counts)
    den = np.sqrt(np.outer(var, var))
    defined = den > 0
    phi = np.zeros((n, n))
    np.divide(num, den, out=phi, where=defined)
    np.fill_diagonal(phi, 0.0)
    np.fill_diagonal(defined, True)
    undefined_pairs = int((~defined).sum() // 2)
    if undefined_pairs:
        log.info("phi undefined for %d pair(s); set to 0", undefined_pairs)
    return phi, undefined_pairs


def _window_subcorpus(corpus: Corpus, window: WindowSpec) -> Corpus:
    if window.center is None:
        raise DataError("window has no center month")
    lo, hi = window.center - window.half_width, window.center + window.half_width
    if lo < corpus.span[0] or hi > corpus.span[1]:
        raise DataError(
            f"window {format_month(window.center)} +/-{window.half_width} lies outside "
            f"corpus span {format_month(corpus.span[0])}..{format_month(corpus.span[1])}"
        )
    docs = [d for d in corpus.documents if lo <= d.month <= hi]
    if not docs:
        raise DataError(f"window {format_month(window.center)} contains no documents")
    return Corpus.from_documents(docs)


def build_network(
    corpus: Corpus,
    n: int,
    window: WindowSpec | None = None,
    keep_negative: bool = False,
) -> TopicNetwork:
    """Build the phi-weighted topic network for a corpus or window.

    The vocabulary is selected within the window, classifications are
    assigned from the window's documents, and negative or undefined phi
    values become absent edges (weight 0). With ``keep_negative`` the
    signed matrix is retained for sensitivity analyses.
    """
    sub = corpus if window is None else _window_subcorpus(corpus, window)
    vocab = assign_classifications(sub, select_vocabulary(sub, n))
    incidence = build_incidence(sub, vocab)
    phi, _ = phi_matrix(incidence.cells)
    if not keep_negative:
        phi = np.where(phi > 0, phi, 0.0)
    np.fill_diagonal(phi, 0.0)
    phi = np.minimum(phi, 1.0)  # guard FP overshoot on perfect association
    if keep_negative:
        phi = np.maximum(phi, -1.0)
    return TopicNetwork(
        vocab=vocab,
        weights=phi,
        window=None if window is None else (window.center, window.half_width),
        provenance=corpus_fingerprint(corpus),
        signed=keep_negative,
    )


def window_centers(corpus: Corpus, spec: WindowSpec) -> list[int]:
    """Centers with full flanks inside the corpus span, advancing by step."""
    first, last = corpus.span
    if corpus.span_months() < spec.width:
        raise DataError(
            f"corpus span of {corpus.span_months()} months cannot fit a window of "
            f"{spec.width} months (+/-{spec.half_width})"
        )
    return list(range(first + spec.half_width, last - spec.half_width + 1, spec.step))


def generate_windows(corpus: Corpus, spec: WindowSpec) -> list[tuple[int, Corpus]]:
    """(center month, sub-corpus) pairs; boundaries inclusive on both ends."""
    out = []
    for center in window_centers(corpus, spec):
        sub = _window_subcorpus(
            corpus, WindowSpec(center=center, half_width=spec.half_width, step=spec.step)
        )
        out.append((center, sub))
    return out

"""Corpus parsing, phrase normalization, and topic vocabulary selection.

A corpus is a set of dated article records (abstract text plus author
keyword phrases). Candidate topics come from the keyword sections; a
topic's prevalence is the fraction of documents whose abstract or keyword
list contains the phrase, and the vocabulary is the top-n candidates by
prevalence.
"""

from __future__ import annotations

import csv
import json
import logging
import string
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

from .errors import CorpusError, DataError

log = logging.getLogger(__name__)

UNCLASSIFIED = "unclassified"

# Normalization table (documented in README): Unicode dashes fold to "-",
# curly quotes to their straight forms, and remaining punctuation is
# stripped at token boundaries only, so interior hyphens survive.
_DASHES = "‐‑‒–—―−"
_TRANSLATION = {ord(c): "-" for c in _DASHES}
_TRANSLATION.update({0x2018: "'", 0x2019: "'", 0x201C: '"', 0x201D: '"'})
_STRIP_CHARS = string.punctuation + "¡¿«»"


def month_index(year: int, month: int) -> int:
    """Months since year 0; the internal calendar unit."""
    return year * 12 + (month - 1)


def parse_month(text: str) -> int:
    """Parse "YYYY-MM" or "YYYY-MM-DD" to a month index (day discarded)."""
    parts = text.strip().split("-")
    if len(parts) not in (2, 3):
        raise CorpusError(f"unparseable date {text!r} (expected YYYY-MM or YYYY-MM-DD)")
    try:
        year, month = int(parts[0]), int(parts[1])
        if len(parts) == 3:
            day = int(parts[2])
            if not 1 <= day <= 31:
                raise ValueError
    except ValueError:
        raise CorpusError(f"unparseable date {text!r}") from None
    if not (1 <= month <= 12) or year < 1:
        raise CorpusError(f"unparseable date {text!r}")
    return month_index(year, month)


def format_month(index: int) -> str:
    return f"{index // 12:04d}-{index % 12 + 1:02d}"


def normalize_phrase(raw: str) -> str:
    """Canonical form of a topic phrase.

    Lowercases, folds unicode dashes and quotes, collapses whitespace, and
    strips punctuation from token ends. Interior hyphens are preserved, so
    "CELL—CYCLE" normalizes to "cell-cycle". May return "" for
    punctuation-only input; callers discard empty phrases.
    """
    text = raw.translate(_TRANSLATION).lower()
    tokens = [tok.strip(_STRIP_CHARS) for tok in text.split()]
    return " ".join(tok for tok in tokens if tok)


@lru_cache(maxsize=None)
def _haystack(text: str) -> str:
    """Space-padded normalized text, so token-boundary matching is a substring test."""
    return f" {normalize_phrase(text)} "


def phrase_in_text(phrase: str, text: str) -> bool:
    """Exact phrase match on token boundaries in normalized text.

    The phrase must already be normalized. "cell cycle" does not match
    "the cell cycles quickly": token boundaries are exact, with no
    stemming or plural folding.
    """
    return f" {phrase} " in _haystack(text)


@dataclass(frozen=True)
class Document:
    """One article record at year-month date resolution."""

    id: str
    month: int
    classifications: tuple[str, ...]
    abstract: str
    keywords: tuple[str, ...]

    @property
    def date(self) -> str:
        return format_month(self.month)

    def normalized_keywords(self) -> frozenset[str]:
        return frozenset(p for p in (normalize_phrase(k) for k in self.keywords) if p)

    def contains(self, phrase: str) -> bool:
        """True if the normalized phrase is in the keywords or the abstract."""
        if phrase in self.normalized_keywords():
            return True
        return bool(self.abstract) and phrase_in_text(phrase, self.abstract)


@dataclass(frozen=True)
class Corpus:
    documents: tuple[Document, ...]
    span: tuple[int, int]

    @classmethod
    def from_documents(cls, documents: Iterable[Document]) -> "Corpus":
        docs = tuple(documents)
        if not docs:
            raise CorpusError("corpus contains no documents")
        seen: set[str] = set()
        for doc in docs:
            if not doc.id:
                raise CorpusError("document with empty id")
            if doc.id in seen:
                raise CorpusError(f"duplicate document id {doc.id!r}")
            seen.add(doc.id)
        months = [d.month for d in docs]
        return cls(documents=docs, span=(min(months), max(months)))

    def __len__(self) -> int:
        return len(self.documents)

    def span_months(self) -> int:
        return self.span[1] - self.span[0] + 1


@dataclass(frozen=True)
class TopicVocabulary:
    """Ordered topic set: descending prevalence, lexicographic tie-break."""

    phrases: tuple[str, ...]
    prevalence: tuple[float, ...]
    classifications: tuple[str | None, ...]

    @property
    def size(self) -> int:
        return len(self.phrases)

    def __post_init__(self):
        if len(set(self.phrases)) != len(self.phrases):
            raise DataError("vocabulary phrases must be unique")
        order = list(zip([-p for p in self.prevalence], self.phrases))
        if order != sorted(order):
            raise DataError("vocabulary must be sorted by descending prevalence, then phrase")


_REQUIRED_FIELDS = ("id", "date", "classifications", "abstract", "keywords")


def _record_to_document(record: dict, lineno: int) -> Document:
    for field in _REQUIRED_FIELDS:
        if field not in record or record[field] is None:
            raise CorpusError(f"line {lineno}: missing required field {field!r}")
    try:
        month = parse_month(str(record["date"]))
    except CorpusError as exc:
        raise CorpusError(f"line {lineno}: {exc}") from None
    doc_id = str(record["id"]).strip()
    if not doc_id:
        raise CorpusError(f"line {lineno}: empty id")
    classifications = record["classifications"]
    keywords = record["keywords"]
    if not isinstance(classifications, (list, tuple)) or not isinstance(keywords, (list, tuple)):
        raise CorpusError(f"line {lineno}: classifications and keywords must be lists")
    cleaned = [str(c).strip() for c in classifications if str(c).strip()]
    return Document(
        id=doc_id,
        month=month,
        classifications=tuple(dict.fromkeys(cleaned)),
        abstract=str(record["abstract"]),
        keywords=tuple(str(k) for k in keywords),
    )


def _parse_jsonl(path: Path) -> list[Document]:
    docs = []
    with path.open("r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"line {lineno}: invalid JSON ({exc.msg})") from None
            if not isinstance(record, dict):
                raise CorpusError(f"line {lineno}: expected a JSON object")
            docs.append(_record_to_document(record, lineno))
    return docs


def _split_cell(cell: str) -> list[str]:
    return [part.strip() for part in cell.split(";") if part.strip()]


def _parse_csv(path: Path) -> list[Document]:
    docs = []
    with path.open("r", encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames or []
        missing = [f for f in _REQUIRED_FIELDS if f not in header]
        if missing:
            raise CorpusError(f"line 1: missing required column(s) {', '.join(missing)}")
        for lineno, row in enumerate(reader, start=2):
            record = {
                "id": row["id"],
                "date": row["date"],
                "classifications": _split_cell(row["classifications"] or ""),
                "abstract": row["abstract"] or "",
                "keywords": _split_cell(row["keywords"] or ""),
            }
            docs.append(_record_to_document(record, lineno))
    return docs


def parse_corpus(path: str | Path, format: str | None = None) -> Corpus:
    """Load a corpus from a JSONL or CSV file.

    ``format`` is "jsonl" or "csv"; when omitted it is inferred from the
    file suffix. Malformed records are rejected with their line number.
    """
    path = Path(path)
    if not path.exists():
        raise CorpusError(f"corpus file not found: {path}")
    if format is None:
        suffix = path.suffix.lower()
        format = {".jsonl": "jsonl", ".json": "jsonl", ".csv": "csv"}.get(suffix)
        if format is None:
            raise CorpusError(f"cannot infer corpus format from suffix {suffix!r}")
    if format == "jsonl":
        docs = _parse_jsonl(path)
    elif format == "csv":
        docs = _parse_csv(path)
    else:
        raise CorpusError(f"unknown corpus format {format!r}")
    return Corpus.from_documents(docs)


def extract_candidate_topics(corpus: Corpus) -> set[str]:
    """Union of normalized keyword phrases across all documents."""
    candidates: set[str] = set()
    for doc in corpus.documents:
        candidates.update(doc.normalized_keywords())
    return candidates


def topic_prevalence(corpus: Corpus, phrase: str) -> float:
    """Fraction of documents containing the phrase in abstract or keywords."""
    if not phrase:
        raise DataError("empty phrase")
    hits = sum(1 for doc in corpus.documents if doc.contains(phrase))
    return hits / len(corpus.documents)


def select_vocabulary(corpus: Corpus, n: int) -> TopicVocabulary:
    """Top-n candidate topics by prevalence.

    Ties at the cutoff break lexicographically (ascending), making the
    selection deterministic. Raises if fewer than n candidates have
    positive prevalence.
    """
    if n < 2:
        raise DataError(f"vocabulary size must be >= 2, got {n}")
    scored = []
    for phrase in extract_candidate_topics(corpus):
        prev = topic_prevalence(corpus, phrase)
        if prev > 0:
            scored.append((phrase, prev))
    if len(scored) < n:
        raise DataError(
            f"requested {n} topics but only {len(scored)} candidates have positive prevalence"
        )
    scored.sort(key=lambda item: (-item[1], item[0]))
    top = scored[:n]
    return TopicVocabulary(
        phrases=tuple(p for p, _ in top),
        prevalence=tuple(v for _, v in top),
        classifications=(None,) * n,
    )


def modal_classification(counts: Counter, topic: str | None = None) -> str:
    """Most common label; ties break to the lexicographically smallest and are logged."""
    if not counts:
        return UNCLASSIFIED
    best = max(counts.values())
    tied = sorted(label for label, c in counts.items() if c == best)
    if len(tied) > 1:
        log.info("classification tie for %s: %s (picked %r)", topic or "topic", tied, tied[0])
    return tied[0]


def assign_classifications(corpus: Corpus, vocab: TopicVocabulary) -> TopicVocabulary:
    """Label each topic with the modal classification of the documents containing it.

    Every label of a containing document counts once. Topics seen only in
    unlabeled documents get the "unclassified" label.
    """
    labels = []
    for phrase in vocab.phrases:
        counts: Counter = Counter()
        for doc in corpus.documents:
            if doc.classifications and doc.contains(phrase):
                counts.update(set(doc.classifications))
        labels.append(modal_classification(counts, phrase))
    return TopicVocabulary(
        phrases=vocab.phrases,
        prevalence=vocab.prevalence,
        classifications=tuple(labels),
    )

"""Synthetic corpora with controllable co-occurrence structure.

Documents draw their keywords from latent topic groups: group topics
appear with probability p_in, off-group topics with p_out. Variants plant
a strengthening co-occurrence trend or a growing rate of cross-group
mixing, which the temporal pipeline should detect; the stationary variant
is the null case.

Run as a module to write a demo corpus and an impact-factor series:

    python -m cooccurnet.synthetic --out demo/ --seed 7
"""

from __future__ import annotations

import argparse
import csv
import json
from pathlib import Path

import numpy as np

from .corpus import Corpus, Document, format_month, parse_month
from .seeding import derive_rng

DEFAULT_TOPICS = 16
DEFAULT_GROUPS = 4


def _topic_names(n_topics: int) -> list[str]:
    return [f"topic {i:02d}" for i in range(n_topics)]


def _make_documents(
    seed: int,
    start: str,
    end: str,
    docs_per_month: int,
    n_topics: int,
    n_groups: int,
    p_in_of_month,
    mix_prob_of_month,
    p_out: float,
) -> Corpus:
    rng = derive_rng(seed, 0)
    topics = _topic_names(n_topics)
    groups = np.arange(n_topics) % n_groups
    first, last = parse_month(start), parse_month(end)
    months = list(range(first, last + 1))
    docs = []
    for t, month in enumerate(months):
        frac = t / max(1, len(months) - 1)
        p_in = p_in_of_month(frac)
        mix_prob = mix_prob_of_month(frac)
        for d in range(docs_per_month):
            g = int(rng.integers(n_groups))
            active = {g}
            if rng.random() < mix_prob:
                other = int(rng.integers(n_groups - 1))
                active.add(other if other < g else other + 1)
            draws = rng.random(n_topics)
            keywords = [
                topics[i]
                for i in range(n_topics)
                if draws[i] < (p_in if groups[i] in active else p_out)
            ]
            if not keywords:
                keywords = [topics[int(rng.integers(n_topics))]]
            docs.append(
                Document(
                    id=f"doc-{format_month(month)}-{d:03d}",
                    month=month,
                    classifications=(f"class-{g}",),
                    abstract=f"a study of {keywords[0]} mechanisms",
                    keywords=tuple(keywords),
                )
            )
    return Corpus.from_documents(docs)


def stationary_corpus(
    seed: int,
    start: str = "2000-01",
    end: str = "2009-12",
    docs_per_month: int = 6,
    n_topics: int = DEFAULT_TOPICS,
    n_groups: int = DEFAULT_GROUPS,
    p_in: float = 0.6,
    p_out: float = 0.1,
) -> Corpus:
    """Fixed topic probabilities and associations over the whole span."""
    return _make_documents(
        seed, start, end, docs_per_month, n_topics, n_groups,
        p_in_of_month=lambda frac: p_in,
        mix_prob_of_month=lambda frac: 0.0,
        p_out=p_out,
    )


def strengthening_corpus(
    seed: int,
    start: str = "2000-01",
    end: str = "2009-12",
    docs_per_month: int = 6,
    n_topics: int = DEFAULT_TOPICS,
    n_groups: int = DEFAULT_GROUPS,
    p_in_start: float = 0.35,
    p_in_end: float = 0.85,
    p_out: float = 0.1,
) -> Corpus:
    """Within-group co-occurrence rises linearly over time."""
    return _make_documents(
        seed, start, end, docs_per_month, n_topics, n_groups,
        p_in_of_month=lambda frac: p_in_start + frac * (p_in_end - p_in_start),
        mix_prob_of_month=lambda frac: 0.0,
        p_out=p_out,
    )


def mixing_corpus(
    seed: int,
    start: str = "2000-01",
    end: str = "2009-12",
    docs_per_month: int = 6,
    n_topics: int = DEFAULT_TOPICS,
    n_groups: int = DEFAULT_GROUPS,
    p_in: float = 0.6,
    p_out: float = 0.1,
    mix_start: float = 0.0,
    mix_end: float = 0.8,
) -> Corpus:
    """Cross-group articles become steadily more common over time."""
    return _make_documents(
        seed, start, end, docs_per_month, n_topics, n_groups,
        p_in_of_month=lambda frac: p_in,
        mix_prob_of_month=lambda frac: mix_start + frac * (mix_end - mix_start),
        p_out=p_out,
    )


def impact_series(seed: int, first_year: int, last_year: int, base: float = 9.0) -> dict[int, float]:
    """Yearly engagement values with a mild trend plus noise."""
    rng = derive_rng(seed, 1)
    years = range(first_year, last_year + 1)
    return {
        y: round(base + 0.12 * (y - first_year) + rng.normal(0, 0.3), 3) for y in years
    }


def write_corpus_jsonl(corpus: Corpus, path: Path) -> None:
    with path.open("w", encoding="utf-8") as handle:
        for doc in corpus.documents:
            handle.write(
                json.dumps(
                    {
                        "id": doc.id,
                        "date": doc.date,
                        "classifications": list(doc.classifications),
                        "abstract": doc.abstract,
                        "keywords": list(doc.keywords),
                    },
                    sort_keys=True,
                )
                + "\n"
            )


def write_impact_csv(series: dict[int, float], path: Path) -> None:
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["year", "impact_factor"])
        for year in sorted(series):
            writer.writerow([year, series[year]])


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="generate a synthetic demo corpus")
    parser.add_argument("--out", type=Path, required=True)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument(
        "--kind", choices=["stationary", "strengthening", "mixing"], default="mixing"
    )
    parser.add_argument("--docs-per-month", type=int, default=6)
    args = parser.parse_args(argv)
    args.out.mkdir(parents=True, exist_ok=True)
    maker = {
        "stationary": stationary_corpus,
        "strengthening": strengthening_corpus,
        "mixing": mixing_corpus,
    }[args.kind]
    corpus = maker(args.seed, docs_per_month=args.docs_per_month)
    write_corpus_jsonl(corpus, args.out / "corpus.jsonl")
    first_year = corpus.span[0] // 12
    last_year = corpus.span[1] // 12
    write_impact_csv(impact_series(args.seed, first_year, last_year), args.out / "impact.csv")
    print(f"wrote {len(corpus)} documents to {args.out / 'corpus.jsonl'}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

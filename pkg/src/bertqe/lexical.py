"""Unsupervised retrieval models: BM25, query likelihood, and DPH.

Scores are computed document-at-a-time over the candidate set of documents
matching at least one query term, so each score is exactly the stated
closed-form formula for that (query, document) pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

from .index import InvertedIndex
from .textutils import STOPWORDS, tokenize

BM25_K1 = 0.9
BM25_B = 0.4
QL_MU = 1000.0

MODELS = ("bm25", "ql", "dph")


@dataclass(frozen=True)
class Query:
    query_id: str
    text: str
    terms: Tuple[str, ...]

    @classmethod
    def from_text(cls, query_id: str, text: str) -> "Query":
        return cls(query_id=query_id, text=text, terms=tuple(tokenize(text)))


@dataclass(frozen=True)
class WeightedQuery:
    query_id: str
    term_weights: Dict[str, float]

    def __post_init__(self) -> None:
        for term, weight in self.term_weights.items():
            if not math.isfinite(weight) or weight < 0:
                raise ValueError(f"bad weight for term {term!r}: {weight}")


@dataclass(frozen=True)
class RunEntry:
    doc_id: str
    score: float
    rank: int


@dataclass(frozen=True)
class RankedList:
    query_id: str
    entries: Tuple[RunEntry, ...]

    @classmethod
    def from_scores(cls, query_id: str, scores: Dict[str, float], k: int | None = None) -> "RankedList":
        """Rank by descending score, ties broken by ascending doc_id."""
        ordered = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
        if k is not None:
            ordered = ordered[:k]
        entries = tuple(
            RunEntry(doc_id=d, score=s, rank=i) for i, (d, s) in enumerate(ordered, start=1)
        )
        return cls(query_id=query_id, entries=entries)

    @property
    def doc_ids(self) -> List[str]:
        return [e.doc_id for e in self.entries]

    def top(self, k: int) -> "RankedList":
        return RankedList(self.query_id, self.entries[:k])


def as_weighted(query: Query | WeightedQuery, remove_stopwords: bool = True) -> WeightedQuery:
    """Convert a keyword query to term weights (weight = term frequency)."""
    if isinstance(query, WeightedQuery):
        return query
    weights: Dict[str, float] = {}
    for term in query.terms:
        if remove_stopwords and term in STOPWORDS:
            continue
        weights[term] = weights.get(term, 0.0) + 1.0
    return WeightedQuery(query_id=query.query_id, term_weights=weights)


# -- per-document scoring formulas -----------------------------------------


def bm25_doc_score(index: InvertedIndex, term_weights: Dict[str, float], doc_id: str) -> float:
    dl = index.doc_length(doc_id)
    avgdl = index.avg_doc_length
    n = index.num_docs
    score = 0.0
    for term, qw in term_weights.items():
        tf = index.tf(term, doc_id)
        if tf == 0 or qw == 0:
            continue
        df = index.df(term)
        idf = math.log(1 + (n - df + 0.5) / (df + 0.5))
        score += qw * idf * tf * (BM25_K1 + 1) / (tf + BM25_K1 * (1 - BM25_B + BM25_B * dl / avgdl))
    return score


def ql_doc_score(index: InvertedIndex, term_weights: Dict[str, float], doc_id: str) -> float:
    """Dirichlet-smoothed query log likelihood over the indexed query terms."""
    dl = index.doc_length(doc_id)
    total = index.total_tokens
    score = 0.0
    for term, qw in term_weights.items():
        cf = index.cf(term)
        if cf == 0 or qw == 0:
            continue
        tf = index.tf(term, doc_id)
        score += qw * math.log((tf + QL_MU * cf / total) / (dl + QL_MU))
    return score


def dph_doc_score(index: InvertedIndex, term_weights: Dict[str, float], doc_id: str) -> float:
    """Parameter-free DPH divergence-from-randomness score (Terrier form)."""
    dl = index.doc_length(doc_id)
    avgdl = index.avg_doc_length
    n = index.num_docs
    score = 0.0
    for term, qw in term_weights.items():
        tf = index.tf(term, doc_id)
        if tf == 0 or qw == 0 or tf >= dl:
            # tf == dl makes the hypergeometric norm vanish; contribution 0
            continue
        cf = index.cf(term)
        f = tf / dl
        norm = (1.0 - f) ** 2 / (tf + 1.0)
        score += qw * norm * (
            tf * math.log2((tf * avgdl / dl) * (n / cf))
            + 0.5 * math.log2(2 * math.pi * tf * (1 - f))
        )
    return score


_SCORERS = {
    "bm25": bm25_doc_score,
    "ql": ql_doc_score,
    "dph": dph_doc_score,
}


def rank(
    index: InvertedIndex,
    query: Query | WeightedQuery,
    model: str,
    k: int,
) -> RankedList:
    """Rank the top-*k* documents matching *query* under *model*.

    A query with no indexed terms produces an empty list rather than an
    error.
    """
    if model not in _SCORERS:
        raise ValueError(f"unknown model {model!r}; expected one of {MODELS}")
    if k < 1:
        raise ValueError("k must be >= 1")
    weighted = as_weighted(query)
    doc_score = _SCORERS[model]
    candidates = index.matching_docs(t for t, w in weighted.term_weights.items() if w > 0)
    scores = {doc_id: doc_score(index, weighted.term_weights, doc_id) for doc_id in candidates}
    return RankedList.from_scores(weighted.query_id, scores, k)

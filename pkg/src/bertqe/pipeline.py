"""Three-phase chunk-based query expansion re-ranking.

Phase one re-scores the initial ranking with a relevance scorer. Phase two
decomposes the top feedback documents into short chunks and keeps the best
scoring ones. Phase three scores every candidate document against the kept
chunks, softmax-weighted by chunk relevance, combines that evidence with
the phase-one score, and interpolates with the initial ranking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from sklearn.base import BaseEstimator

from .corpus import Chunk, Document, decompose_chunks
from .index import build_index
from .lexical import Query, RankedList
from .scoring import (
    CachingScorer,
    MockLexicalScorer,
    ScorePair,
    Scorer,
    ScorerError,
    clamp_probability,
    maxp_scores,
)

ABLATIONS = ("none", "remove_qd", "chunks_from_initial")


@dataclass(frozen=True)
class PipelineConfig:
    """All pipeline hyper-parameters, defaulting to the canonical setup."""

    k_d: int = 10
    k_c: int = 10
    m: int = 10
    alpha: float = 0.4
    beta: float = 0.9
    rerank_depth: int = 1000
    ablation: str = "none"
    window: int = 100
    stride: int = 50

    def validate(self) -> None:
        if self.k_d < 1:
            raise ValueError("k_d must be >= 1")
        if self.k_c < 1:
            raise ValueError("k_c must be >= 1")
        if self.m < 2:
            raise ValueError("m must be >= 2")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError("beta must lie in [0, 1]")
        if self.rerank_depth < 1:
            raise ValueError("rerank_depth must be >= 1")
        if self.ablation not in ABLATIONS:
            raise ValueError(f"unknown ablation {self.ablation!r}; expected one of {ABLATIONS}")


@dataclass(frozen=True)
class PhaseScorers:
    """Relevance scorer handle per pipeline phase."""

    phase1: Scorer
    phase2: Scorer
    phase3: Scorer

    @classmethod
    def shared(cls, scorer: Scorer) -> "PhaseScorers":
        return cls(scorer, scorer, scorer)


@dataclass(frozen=True)
class ScoredChunk:
    chunk: Chunk
    score: float


@dataclass(frozen=True)
class ChunkSet:
    query_id: str
    chunks: Tuple[ScoredChunk, ...]
    weights: Tuple[float, ...]


def softmax(values: Sequence[float]) -> List[float]:
    peak = max(values)
    exps = [math.exp(v - peak) for v in values]
    total = sum(exps)
    return [e / total for e in exps]


def phase_one(
    query_text: str,
    initial: RankedList,
    scorer: Scorer,
    depth: int,
    docs: Mapping[str, Document],
    window: int = 100,
    stride: int = 50,
) -> RankedList:
    """Re-score the top ``depth`` initial documents with MaxP and re-sort."""
    if not initial.entries:
        raise ValueError(f"query {initial.query_id!r}: empty initial ranking")
    candidates = [docs[e.doc_id] for e in initial.entries[:depth]]
    scores = maxp_scores(scorer, query_text, candidates, window=window, stride=stride)
    return RankedList.from_scores(initial.query_id, scores)


def select_chunks(
    query_text: str,
    feedback: RankedList,
    docs: Mapping[str, Document],
    scorer: Scorer,
    k_d: int = 10,
    k_c: int = 10,
    m: int = 10,
) -> ChunkSet:
    """Score every chunk of the top ``k_d`` feedback docs, keep the best ``k_c``.

    Softmax weights are computed over the kept set only. Ties are broken
    by (doc_id, start) so the selection is deterministic.
    """
    if not feedback.entries:
        raise ValueError(f"query {feedback.query_id!r}: empty feedback ranking")
    chunks: List[Chunk] = []
    for entry in feedback.entries[:k_d]:
        chunks.extend(decompose_chunks(docs[entry.doc_id], m=m))
    if not chunks:
        return ChunkSet(query_id=feedback.query_id, chunks=(), weights=())
    scores = scorer.score_pairs([ScorePair(query_text, c.text) for c in chunks])
    scored = [ScoredChunk(chunk=c, score=s) for c, s in zip(chunks, scores)]
    scored.sort(key=lambda sc: (-sc.score, sc.chunk.doc_id, sc.chunk.start))
    kept = tuple(scored[:k_c])
    weights = tuple(softmax([sc.score for sc in kept]))
    return ChunkSet(query_id=feedback.query_id, chunks=kept, weights=weights)


def feedback_score(
    chunks: ChunkSet,
    doc: Document,
    scorer: Scorer,
    window: int = 100,
    stride: int = 50,
) -> float:
    """Softmax-weighted sum of chunk-vs-document MaxP scores."""
    if not chunks.chunks:
        raise ValueError("feedback_score requires a non-empty chunk set")
    total = 0.0
    for sc, weight in zip(chunks.chunks, chunks.weights):
        total += weight * maxp_scores(scorer, sc.chunk.text, [doc], window, stride)[doc.doc_id]
    return total


def combine(rel_qd: float, rel_cd: float, alpha: float) -> float:
    """Convex combination of query and chunk-feedback evidence."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    return (1.0 - alpha) * rel_qd + alpha * rel_cd


def interpolate_initial(model_score: float, initial_score: float, beta: float) -> float:
    """beta * ln(model score) + (1 - beta) * initial score."""
    if not 0.0 <= beta <= 1.0:
        raise ValueError("beta must lie in [0, 1]")
    return beta * math.log(clamp_probability(model_score)) + (1.0 - beta) * initial_score


@dataclass
class BertQEResult:
    runs: Dict[str, RankedList] = field(default_factory=dict)
    traces: Dict[str, dict] = field(default_factory=dict)
    failures: Dict[str, str] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failures


def rerank_query(
    query: Query,
    initial: RankedList,
    docs: Mapping[str, Document],
    config: PipelineConfig,
    scorers: PhaseScorers,
) -> Tuple[RankedList, dict]:
    """Run the full three-phase pipeline for one query."""
    config.validate()
    initial_top = initial.top(config.rerank_depth)
    initial_scores = {e.doc_id: e.score for e in initial_top.entries}

    p1 = phase_one(
        query.text, initial_top, scorers.phase1, config.rerank_depth, docs,
        window=config.window, stride=config.stride,
    )
    rel_qd = {e.doc_id: e.score for e in p1.entries}

    chunk_source = initial_top if config.ablation == "chunks_from_initial" else p1
    chunk_set = select_chunks(
        query.text, chunk_source, docs, scorers.phase2,
        k_d=config.k_d, k_c=config.k_c, m=config.m,
    )

    alpha = 1.0 if config.ablation == "remove_qd" else config.alpha

    candidates = [docs[e.doc_id] for e in p1.entries]
    if chunk_set.chunks:
        rel_cd = {doc_id: 0.0 for doc_id in rel_qd}
        for sc, weight in zip(chunk_set.chunks, chunk_set.weights):
            chunk_scores = maxp_scores(
                scorers.phase3, sc.chunk.text, candidates, config.window, config.stride
            )
            for doc_id, score in chunk_scores.items():
                rel_cd[doc_id] += weight * score
    else:
        # degenerate: no scoreable chunk anywhere in the feedback docs
        rel_cd = dict(rel_qd)

    final_scores = {}
    doc_trace = []
    for entry in p1.entries:
        doc_id = entry.doc_id
        combined = combine(rel_qd[doc_id], rel_cd[doc_id], alpha)
        final = interpolate_initial(combined, initial_scores[doc_id], config.beta)
        final_scores[doc_id] = final
        doc_trace.append(
            {
                "doc_id": doc_id,
                "initial_score": initial_scores[doc_id],
                "rel_qd": rel_qd[doc_id],
                "rel_cd": rel_cd[doc_id],
                "combined": combined,
                "final": final,
            }
        )

    run = RankedList.from_scores(query.query_id, final_scores)
    trace = {
        "query_id": query.query_id,
        "query": query.text,
        "ablation": config.ablation,
        "alpha_used": alpha,
        "beta": config.beta,
        "degenerate_no_chunks": not chunk_set.chunks,
        "chunks": [
            {
                "doc_id": sc.chunk.doc_id,
                "start": sc.chunk.start,
                "text": sc.chunk.text,
                "score": sc.score,
                "weight": weight,
            }
            for sc, weight in zip(chunk_set.chunks, chunk_set.weights)
        ],
        "documents": doc_trace,
    }
    return run, trace


def run_bertqe(
    queries: Sequence[Query],
    initial_runs: Mapping[str, RankedList],
    docs: Mapping[str, Document],
    config: PipelineConfig,
    scorers: PhaseScorers,
) -> BertQEResult:
    """Run the pipeline over many queries; per-query failures are isolated."""
    result = BertQEResult()
    for query in queries:
        initial = initial_runs.get(query.query_id)
        if initial is None or not initial.entries:
            result.failures[query.query_id] = "no initial ranking"
            continue
        try:
            run, trace = rerank_query(query, initial, docs, config, scorers)
        except ScorerError as exc:
            result.failures[query.query_id] = f"scorer failure: {exc}"
            continue
        result.runs[query.query_id] = run
        result.traces[query.query_id] = trace
    return result


def recombine_trace(
    trace: dict, alpha: float, beta: float, remove_qd: bool = False
) -> RankedList:
    """Rebuild a final ranking from a trace under different (alpha, beta).

    The expensive scorer evidence (rel_qd, rel_cd, initial scores) is
    already in the trace, so grid cells cost only arithmetic.
    """
    alpha = 1.0 if remove_qd else alpha
    scores = {}
    for doc in trace["documents"]:
        combined = combine(doc["rel_qd"], doc["rel_cd"], alpha)
        scores[doc["doc_id"]] = interpolate_initial(combined, doc["initial_score"], beta)
    return RankedList.from_scores(trace["query_id"], scores)


class BertQE(BaseEstimator):
    """Estimator-style wrapper around the pipeline.

    ``fit`` ingests the document collection (building an index for the
    default offline scorer); ``rerank`` consumes queries plus their
    initial rankings. All constructor arguments are plain parameters, so
    ``get_params`` / ``set_params`` / ``clone`` work as usual.
    """

    def __init__(
        self,
        k_d: int = 10,
        k_c: int = 10,
        m: int = 10,
        alpha: float = 0.4,
        beta: float = 0.9,
        rerank_depth: int = 1000,
        ablation: str = "none",
        window: int = 100,
        stride: int = 50,
        scorer: Optional[Scorer] = None,
        scorer_phase2: Optional[Scorer] = None,
        scorer_phase3: Optional[Scorer] = None,
        cache_scores: bool = True,
    ) -> None:
        self.k_d = k_d
        self.k_c = k_c
        self.m = m
        self.alpha = alpha
        self.beta = beta
        self.rerank_depth = rerank_depth
        self.ablation = ablation
        self.window = window
        self.stride = stride
        self.scorer = scorer
        self.scorer_phase2 = scorer_phase2
        self.scorer_phase3 = scorer_phase3
        self.cache_scores = cache_scores

    def _config(self) -> PipelineConfig:
        config = PipelineConfig(
            k_d=self.k_d,
            k_c=self.k_c,
            m=self.m,
            alpha=self.alpha,
            beta=self.beta,
            rerank_depth=self.rerank_depth,
            ablation=self.ablation,
            window=self.window,
            stride=self.stride,
        )
        config.validate()
        return config

    def fit(self, documents: Sequence[Document], y=None) -> "BertQE":
        self._config()
        self.docs_ = {}
        for doc in documents:
            if doc.doc_id in self.docs_:
                raise ValueError(f"duplicate doc_id: {doc.doc_id!r}")
            self.docs_[doc.doc_id] = doc
        base = self.scorer or MockLexicalScorer(index=build_index(documents))
        phase2 = self.scorer_phase2 or base
        phase3 = self.scorer_phase3 or base
        if self.cache_scores:
            wrapped: Dict[int, Scorer] = {}
            for s in (base, phase2, phase3):
                if id(s) not in wrapped:
                    wrapped[id(s)] = CachingScorer(s)
            base, phase2, phase3 = (wrapped[id(s)] for s in (base, phase2, phase3))
        self.scorers_ = PhaseScorers(base, phase2, phase3)
        return self

    def rerank(
        self, queries: Sequence[Query], initial_runs: Mapping[str, RankedList]
    ) -> BertQEResult:
        if not hasattr(self, "scorers_"):
            raise RuntimeError("BertQE must be fitted before rerank")
        return run_bertqe(queries, initial_runs, self.docs_, self._config(), self.scorers_)

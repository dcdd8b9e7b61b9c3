"""Classic pseudo-relevance-feedback query expansion: RM3 and KL/Rocchio."""

from __future__ import annotations

import math
from collections import Counter
from typing import Dict, Mapping

from .corpus import Document
from .index import InvertedIndex
from .lexical import Query, RankedList, WeightedQuery, as_weighted, rank
from .textutils import STOPWORDS

RM3_FB_DOCS = 10
RM3_FB_TERMS = 10
RM3_MIX = 0.5

KL_FB_DOCS = 10
KL_FB_TERMS = 10
KL_EXPANSION_WEIGHT = 0.4


def _feedback_docs(
    feedback: RankedList, docs: Mapping[str, Document], fb_docs: int
) -> list[Document]:
    if not feedback.entries:
        raise ValueError(f"query {feedback.query_id!r}: empty feedback list")
    return [docs[e.doc_id] for e in feedback.entries[:fb_docs]]


def _softmax_doc_weights(feedback: RankedList, fb_docs: int) -> list[float]:
    scores = [e.score for e in feedback.entries[:fb_docs]]
    peak = max(scores)
    exps = [math.exp(s - peak) for s in scores]
    total = sum(exps)
    return [e / total for e in exps]


def rm3_expand(
    query: Query,
    feedback: RankedList,
    docs: Mapping[str, Document],
    fb_docs: int = RM3_FB_DOCS,
    fb_terms: int = RM3_FB_TERMS,
    mix: float = RM3_MIX,
) -> WeightedQuery:
    """Relevance-model expansion mixed with the original query distribution.

    The feedback term distribution is a document-weight-averaged maximum
    likelihood estimate, truncated to the ``fb_terms`` strongest terms and
    renormalized; document weights come from a softmax over the feedback
    scores. The output mixes ``mix`` parts original query with ``1 - mix``
    parts feedback model and always sums to one.
    """
    if not 0.0 <= mix <= 1.0:
        raise ValueError("mix must lie in [0, 1]")
    fb = _feedback_docs(feedback, docs, fb_docs)
    doc_weights = _softmax_doc_weights(feedback, fb_docs)

    relevance_model: Dict[str, float] = {}
    for doc, dw in zip(fb, doc_weights):
        if doc.token_count == 0:
            continue
        counts = Counter(doc.tokens)
        for term, tf in counts.items():
            if term in STOPWORDS:
                continue
            relevance_model[term] = relevance_model.get(term, 0.0) + dw * tf / doc.token_count

    kept = sorted(relevance_model.items(), key=lambda kv: (-kv[1], kv[0]))[:fb_terms]
    total = sum(w for _, w in kept)
    feedback_model = {t: w / total for t, w in kept} if total > 0 else {}

    original = as_weighted(query)
    qmass = sum(original.term_weights.values())
    query_model = {t: w / qmass for t, w in original.term_weights.items()} if qmass else {}
    # degenerate sides collapse to the other so the output stays a
    # proper distribution
    if not feedback_model:
        return WeightedQuery(query_id=query.query_id, term_weights=dict(query_model))
    if not query_model:
        return WeightedQuery(query_id=query.query_id, term_weights=dict(feedback_model))

    combined: Dict[str, float] = {}
    for term in set(query_model) | set(feedback_model):
        weight = mix * query_model.get(term, 0.0) + (1 - mix) * feedback_model.get(term, 0.0)
        if weight > 0:
            combined[term] = weight
    return WeightedQuery(query_id=query.query_id, term_weights=combined)


def kl_term_scores(
    index: InvertedIndex, feedback_docs: list[Document]
) -> Dict[str, float]:
    """KL divergence contribution of each feedback term vs the collection."""
    counts: Counter[str] = Counter()
    for doc in feedback_docs:
        counts.update(doc.tokens)
    fb_total = sum(counts.values())
    scores: Dict[str, float] = {}
    for term, tf in counts.items():
        if term in STOPWORDS:
            continue
        p_fb = tf / fb_total
        p_coll = index.cf(term) / index.total_tokens
        if p_coll <= 0 or p_fb <= p_coll:
            continue  # non-positive divergence contribution, never selected
        scores[term] = p_fb * math.log2(p_fb / p_coll)
    return scores


def kl_expand(
    query: Query,
    feedback: RankedList,
    index: InvertedIndex,
    docs: Mapping[str, Document],
    fb_docs: int = KL_FB_DOCS,
    fb_terms: int = KL_FB_TERMS,
    expansion_weight: float = KL_EXPANSION_WEIGHT,
) -> WeightedQuery:
    """Rocchio-style expansion with KL-divergence term selection.

    Original terms carry weight 1.0; the top ``fb_terms`` divergent terms
    are added with weights normalized to a maximum of 1.0 and scaled by
    ``expansion_weight``. ``fb_terms=0`` returns the original query.
    """
    fb = _feedback_docs(feedback, docs, fb_docs)
    weights: Dict[str, float] = {}
    for term in as_weighted(query).term_weights:
        weights[term] = 1.0
    if fb_terms > 0:
        scores = kl_term_scores(index, fb)
        kept = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))[:fb_terms]
        if kept:
            peak = kept[0][1]
            for term, score in kept:
                weights[term] = weights.get(term, 0.0) + expansion_weight * score / peak
    return WeightedQuery(query_id=query.query_id, term_weights=weights)


def dph_kl_pipeline(
    index: InvertedIndex,
    query: Query,
    docs: Mapping[str, Document],
    k: int,
    fb_docs: int = KL_FB_DOCS,
    fb_terms: int = KL_FB_TERMS,
) -> RankedList:
    """The canonical initial ranking: DPH, KL expansion, DPH again."""
    first_pass = rank(index, query, "dph", k=fb_docs)
    if not first_pass.entries:
        return rank(index, query, "dph", k=k)
    expanded = kl_expand(query, first_pass, index, docs, fb_docs=fb_docs, fb_terms=fb_terms)
    return rank(index, expanded, "dph", k=k)

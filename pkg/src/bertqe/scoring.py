"""Pluggable relevance scorers: the offline lexical mock, a remote-service
client, MaxP document aggregation, and a transparent score cache.

Every scorer maps (text_a, text_b) pairs to probabilities in
``[PROB_FLOOR, 1 - PROB_FLOOR]``, deterministically per handle, preserving
batch order.
"""

from __future__ import annotations

import hashlib
import math
import threading
from abc import ABC, abstractmethod
from collections import Counter
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import httpx

from .corpus import Document, decompose_passages
from .index import InvertedIndex
from .textutils import tokenize

PROB_FLOOR = 1e-6
MAX_COMBINED_TOKENS = 384
REMOTE_BATCH_LIMIT = 256


@dataclass(frozen=True)
class ScorePair:
    text_a: str
    text_b: str


class ScorerError(Exception):
    """Base class for scorer failures."""


class ScorerTransportError(ScorerError):
    """Remote scorer unreachable or timed out; safe to retry."""


class ScorerProtocolError(ScorerError):
    """Remote scorer answered, but the response violated the protocol."""


def clamp_probability(p: float) -> float:
    return min(max(p, PROB_FLOOR), 1.0 - PROB_FLOOR)


def sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


class Scorer(ABC):
    """Deterministic batch scorer of text pairs."""

    #: stable identifier used for cache keys
    scorer_id: str = "scorer"
    max_length: int = MAX_COMBINED_TOKENS

    @abstractmethod
    def score_pairs(self, pairs: Sequence[ScorePair]) -> List[float]:
        """One probability per pair, same order, clamped to (0, 1)."""

    def score_pair(self, text_a: str, text_b: str) -> float:
        return self.score_pairs([ScorePair(text_a, text_b)])[0]


def truncate_pair(pair: ScorePair, max_length: int) -> Tuple[List[str], List[str]]:
    """Token views of a pair fitted to a combined token budget.

    The document side is truncated first, mirroring how a fixed-length
    cross-encoder input is packed.
    """
    a = tokenize(pair.text_a)[:max_length]
    b = tokenize(pair.text_b)[: max(0, max_length - len(a))]
    return a, b


class MockLexicalScorer(Scorer):
    """Deterministic stand-in for a trained cross-encoder.

    Scores a pair by idf-weighted coverage of the query-side terms in the
    document side:

        s = sum over t in a&b of idf(t) * (1 + ln tf_b(t)) / sum over t in a of idf(t)
        p = sigmoid(gain * s + shift)

    idf comes from an attached index; with no index every term counts 1.
    """

    def __init__(
        self,
        index: Optional[InvertedIndex] = None,
        gain: float = 4.0,
        shift: float = -2.0,
        max_length: int = MAX_COMBINED_TOKENS,
    ) -> None:
        self.index = index
        self.gain = gain
        self.shift = shift
        self.max_length = max_length
        tag = "idf" if index is not None else "uniform"
        self.scorer_id = f"mock-lexical/{tag}/g{gain}/s{shift}/l{max_length}"

    def _idf(self, term: str) -> float:
        if self.index is None:
            return 1.0
        return self.index.idf(term)

    def score_pairs(self, pairs: Sequence[ScorePair]) -> List[float]:
        return [self._score(pair) for pair in pairs]

    def _score(self, pair: ScorePair) -> float:
        a_tokens, b_tokens = truncate_pair(pair, self.max_length)
        tf_b = Counter(b_tokens)
        a_terms = sorted(set(a_tokens))
        denom = sum(self._idf(t) for t in a_terms)
        if denom > 0:
            s = sum(
                self._idf(t) * (1.0 + math.log(tf_b[t])) for t in a_terms if tf_b[t] > 0
            ) / denom
        else:
            s = 0.0
        return clamp_probability(sigmoid(self.gain * s + self.shift))


class RemoteScorer(Scorer):
    """Client for the ``POST /score`` wire protocol.

    Batches above ``batch_limit`` pairs are split client-side; responses
    are validated for length and score range before use.
    """

    def __init__(
        self,
        endpoint: str,
        batch_limit: int = REMOTE_BATCH_LIMIT,
        timeout: float = 30.0,
        max_length: int = MAX_COMBINED_TOKENS,
        transport: Optional[httpx.BaseTransport] = None,
    ) -> None:
        self.endpoint = endpoint.rstrip("/")
        self.batch_limit = batch_limit
        self.max_length = max_length
        self.scorer_id = f"remote/{self.endpoint}"
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def close(self) -> None:
        self._client.close()

    def health(self) -> Dict[str, str]:
        try:
            response = self._client.get(f"{self.endpoint}/health")
        except httpx.HTTPError as exc:
            raise ScorerTransportError(str(exc)) from exc
        if response.status_code != 200:
            raise ScorerProtocolError(f"health check failed: HTTP {response.status_code}")
        return response.json()

    def score_pairs(self, pairs: Sequence[ScorePair]) -> List[float]:
        scores: List[float] = []
        for start in range(0, len(pairs), self.batch_limit):
            scores.extend(self._score_batch(pairs[start : start + self.batch_limit]))
        return scores

    def _score_batch(self, batch: Sequence[ScorePair]) -> List[float]:
        body = {"pairs": [{"a": p.text_a, "b": p.text_b} for p in batch]}
        try:
            response = self._client.post(f"{self.endpoint}/score", json=body)
        except httpx.HTTPError as exc:
            raise ScorerTransportError(str(exc)) from exc
        if response.status_code != 200:
            raise ScorerProtocolError(
                f"scorer returned HTTP {response.status_code}: {response.text[:200]}"
            )
        try:
            payload = response.json()
            scores = payload["scores"]
        except (ValueError, KeyError, TypeError) as exc:
            raise ScorerProtocolError(f"malformed scorer response: {exc}") from exc
        if not isinstance(scores, list) or len(scores) != len(batch):
            raise ScorerProtocolError(
                f"expected {len(batch)} scores, got {len(scores) if isinstance(scores, list) else scores!r}"
            )
        out = []
        for value in scores:
            if not isinstance(value, (int, float)) or not 0.0 < float(value) < 1.0:
                raise ScorerProtocolError(f"score out of (0,1): {value!r}")
            out.append(clamp_probability(float(value)))
        return out


class CachingScorer(Scorer):
    """Wraps a scorer with a (scorer_id, hash(a), hash(b)) keyed cache.

    By scorer determinism, concurrent writes to the same key store the
    same value, so a plain last-write-wins dict is safe.
    """

    def __init__(self, inner: Scorer) -> None:
        self.inner = inner
        self.scorer_id = inner.scorer_id
        self.max_length = inner.max_length
        self._cache: Dict[Tuple[str, str, str], float] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def _key(self, pair: ScorePair) -> Tuple[str, str, str]:
        ha = hashlib.sha1(pair.text_a.encode("utf-8")).hexdigest()
        hb = hashlib.sha1(pair.text_b.encode("utf-8")).hexdigest()
        return (self.inner.scorer_id, ha, hb)

    def score_pairs(self, pairs: Sequence[ScorePair]) -> List[float]:
        keys = [self._key(p) for p in pairs]
        with self._lock:
            missing = [i for i, k in enumerate(keys) if k not in self._cache]
        if missing:
            fresh = self.inner.score_pairs([pairs[i] for i in missing])
            with self._lock:
                for i, score in zip(missing, fresh):
                    self._cache[keys[i]] = score
        with self._lock:
            self.hits += len(pairs) - len(missing)
            self.misses += len(missing)
            return [self._cache[k] for k in keys]


def score_document_maxp(
    scorer: Scorer,
    query_text: str,
    doc: Document,
    window: int = 100,
    stride: int = 50,
) -> float:
    """MaxP: a document scores as its best passage against the query."""
    passages = decompose_passages(doc, window=window, stride=stride)
    if not passages:
        return scorer.score_pair(query_text, doc.text)
    pairs = [ScorePair(query_text, p.text) for p in passages]
    return max(scorer.score_pairs(pairs))


def maxp_scores(
    scorer: Scorer,
    query_text: str,
    docs: Sequence[Document],
    window: int = 100,
    stride: int = 50,
) -> Dict[str, float]:
    """MaxP scores for many documents with one batched scorer call."""
    pairs: List[ScorePair] = []
    spans: List[Tuple[str, int, int]] = []
    for doc in docs:
        passages = decompose_passages(doc, window=window, stride=stride)
        texts = [p.text for p in passages] if passages else [doc.text]
        spans.append((doc.doc_id, len(pairs), len(pairs) + len(texts)))
        pairs.extend(ScorePair(query_text, t) for t in texts)
    scores = scorer.score_pairs(pairs) if pairs else []
    return {doc_id: max(scores[lo:hi]) for doc_id, lo, hi in spans}

"""Shared synthetic fixtures: a deterministic topical corpus with queries
and relevance judgments derived from document composition."""

from __future__ import annotations

import random
from typing import Dict, List, Tuple

import pytest

from bertqe.corpus import Document, corpus_by_id
from bertqe.evaluation import Qrels
from bertqe.index import build_index
from bertqe.lexical import Query

TOPICS: Dict[str, List[str]] = {
    "volcano": ["volcano", "eruption", "lava", "magma", "ash", "crater"],
    "piracy": ["piracy", "maritime", "hijacking", "vessel", "ransom", "coastline"],
    "telescope": ["telescope", "orbit", "mirror", "infrared", "galaxy", "nebula"],
    "cheese": ["cheese", "dairy", "curd", "aging", "rennet", "creamery"],
    "cycling": ["cycling", "peloton", "sprint", "climb", "stage", "breakaway"],
    "glacier": ["glacier", "icecap", "meltwater", "moraine", "crevasse", "fjord"],
    "opera": ["opera", "soprano", "aria", "libretto", "tenor", "overture"],
    "malware": ["malware", "botnet", "phishing", "exploit", "payload", "firewall"],
    "harvest": ["harvest", "wheat", "irrigation", "yield", "drought", "fertilizer"],
    "subway": ["subway", "transit", "tunnel", "platform", "commuter", "signaling"],
}

_FILLER = [
    "report", "study", "people", "world", "system", "group", "water", "city",
    "found", "years", "large", "small", "early", "major", "often", "local",
    "along", "between", "result", "public", "region", "number", "program",
    "history", "century", "project", "service", "development", "research",
    "government", "national", "important", "several", "including", "around",
    "known", "called", "during", "under", "first", "second", "third", "work",
    "areas", "place", "within", "across", "through", "against", "without",
]


def build_documents(n_docs: int, seed: int = 13) -> List[Document]:
    """Deterministic topical corpus: each document leans on one topic."""
    rng = random.Random(seed)
    topic_names = sorted(TOPICS)
    docs = []
    for i in range(n_docs):
        topic = topic_names[i % len(topic_names)]
        # topic density controls how strongly the doc is about its topic
        density = rng.choice([0.02, 0.08, 0.20])
        length = rng.randint(60, 280)
        words = []
        for _ in range(length):
            if rng.random() < density:
                words.append(rng.choice(TOPICS[topic]))
            else:
                words.append(rng.choice(_FILLER))
        docs.append(Document.from_text(f"D{i:04d}", " ".join(words)))
    return docs


def build_queries() -> List[Query]:
    queries = []
    for i, topic in enumerate(sorted(TOPICS), start=701):
        words = TOPICS[topic]
        queries.append(Query.from_text(str(i), f"{words[0]} {words[1]} {words[2]}"))
    return queries


def build_qrels(docs: List[Document], queries: List[Query]) -> Qrels:
    """Grade by density of query-topic terms in the document."""
    judgments: Dict[Tuple[str, str], int] = {}
    for query in queries:
        terms = set(query.terms)
        for doc in docs:
            hits = sum(1 for t in doc.tokens if t in terms)
            rate = hits / doc.token_count if doc.token_count else 0.0
            if rate >= 0.05:
                grade = 2
            elif rate >= 0.015:
                grade = 1
            else:
                continue
            judgments[(query.query_id, doc.doc_id)] = grade
    return Qrels(judgments)


@pytest.fixture(scope="session")
def small_docs() -> List[Document]:
    return build_documents(60, seed=13)


@pytest.fixture(scope="session")
def small_docs_by_id(small_docs):
    return corpus_by_id(small_docs)


@pytest.fixture(scope="session")
def small_index(small_docs):
    return build_index(small_docs)


@pytest.fixture(scope="session")
def large_docs() -> List[Document]:
    return build_documents(1000, seed=13)


@pytest.fixture(scope="session")
def large_docs_by_id(large_docs):
    return corpus_by_id(large_docs)


@pytest.fixture(scope="session")
def large_index(large_docs):
    return build_index(large_docs)


@pytest.fixture(scope="session")
def queries() -> List[Query]:
    return build_queries()


@pytest.fixture(scope="session")
def small_qrels(small_docs, queries):
    return build_qrels(small_docs, queries)


@pytest.fixture(scope="session")
def large_qrels(large_docs, queries):
    return build_qrels(large_docs, queries)



import math
from collections import Counter

import pytest

from bertqe.corpus import Document
from bertqe.index import build_index
from bertqe.lexical import (
    Query,
    RankedList,
    WeightedQuery,
    as_weighted,
    rank,
)
from bertqe.textutils import STOPWORDS

FIVE_DOCS = [
    Document.from_text("d1", "volcano eruption lava lava ash report study"),
    Document.from_text("d2", "volcano report study people world system water"),
    Document.from_text("d3", "cheese dairy curd report study people world"),
    Document.from_text("d4", "eruption eruption eruption ash crater city found"),
    Document.from_text("d5", "report study people world system water city"),
]


@pytest.fixture(scope="module")
def five_index():
    return build_index(FIVE_DOCS)


def brute_force_bm25(docs, query_terms, k1=0.9, b=0.4):
    """Direct formula evaluation outside the index path."""
    n = len(docs)
    avgdl = sum(d.token_count for d in docs) / n
    df = Counter()
    for d in docs:
        df.update(set(d.tokens))
    scores = {}
    for d in docs:
        tf = Counter(d.tokens)
        s = 0.0
        for t, qw in query_terms.items():
            if tf[t] == 0:
                continue
            idf = math.log(1 + (n - df[t] + 0.5) / (df[t] + 0.5))
            s += qw * idf * tf[t] * (k1 + 1) / (tf[t] + k1 * (1 - b + b * d.token_count / avgdl))
        if any(tf[t] for t in query_terms):
            scores[d.doc_id] = s
    return scores


def brute_force_ql(docs, query_terms, mu=1000.0):
    total = sum(d.token_count for d in docs)
    cf = Counter()
    for d in docs:
        cf.update(d.tokens)
    scores = {}
    for d in docs:
        tf = Counter(d.tokens)
        if not any(tf[t] for t in query_terms):
            continue
        s = 0.0
        for t, qw in query_terms.items():
            if cf[t] == 0:
                continue
            s += qw * math.log((tf[t] + mu * cf[t] / total) / (d.token_count + mu))
        scores[d.doc_id] = s
    return scores


def brute_force_dph(docs, query_terms):
    n = len(docs)
    avgdl = sum(d.token_count for d in docs) / n
    cf = Counter()
    for d in docs:
        cf.update(d.tokens)
    scores = {}
    for d in docs:
        tf = Counter(d.tokens)
        if not any(tf[t] for t in query_terms):
            continue
        dl = d.token_count
        s = 0.0
        for t, qw in query_terms.items():
            if tf[t] == 0 or tf[t] >= dl:
                continue
            f = tf[t] / dl
            norm = (1 - f) ** 2 / (tf[t] + 1)
            s += qw * norm * (
                tf[t] * math.log2((tf[t] * avgdl / dl) * (n / cf[t]))
                + 0.5 * math.log2(2 * math.pi * tf[t] * (1 - f))
            )
        scores[d.doc_id] = s
    return scores


BRUTE_FORCE = {"bm25": brute_force_bm25, "ql": brute_force_ql, "dph": brute_force_dph}


def query_weights(text):
    terms = {}
    for t in text.split():
        if t not in STOPWORDS:
            terms[t] = terms.get(t, 0.0) + 1.0
    return terms


class TestRanking:
    def test_single_term_single_doc_all_models(self, five_index):
        query = Query.from_text("q", "crater")
        for model in ("bm25", "ql", "dph"):
            result = rank(five_index, query, model, k=5)
            assert result.entries[0].doc_id == "d4"
            assert result.entries[0].rank == 1

    @pytest.mark.parametrize("model", ["bm25", "ql", "dph"])
    @pytest.mark.parametrize("text", ["volcano eruption ash", "report city", "cheese curd dairy"])
    def test_scores_match_brute_force(self, five_index, model, text):
        weights = query_weights(text)
        expected = BRUTE_FORCE[model](FIVE_DOCS, weights)
        result = rank(five_index, Query.from_text("q", text), model, k=10)
        got = {e.doc_id: e.score for e in result.entries}
        assert set(got) == set(expected)
        for doc_id, score in expected.items():
            assert got[doc_id] == pytest.approx(score, abs=1e-12)

    @pytest.mark.parametrize("model", ["bm25", "ql", "dph"])
    def test_fixture_corpus_rankings_match_brute_force(self, small_docs, small_index, queries, model):
        for query in queries:
            weights = query_weights(query.text)
            expected = BRUTE_FORCE[model](small_docs, weights)
            order = sorted(expected.items(), key=lambda kv: (-kv[1], kv[0]))
            got = rank(small_index, query, model, k=len(small_docs))
            assert [e.doc_id for e in got.entries] == [d for d, _ in order]

    def test_ties_broken_by_doc_id(self):
        docs = [Document.from_text("b", "x y"), Document.from_text("a", "x y")]
        index = build_index(docs)
        result = rank(index, Query.from_text("q", "x"), "bm25", k=2)
        assert result.doc_ids == ["a", "b"]
        assert result.entries[0].score == result.entries[1].score

    def test_unindexed_query_gives_empty_list(self, five_index):
        result = rank(five_index, Query.from_text("q", "zzzz qqqq"), "bm25", k=5)
        assert result.entries == ()

    def test_k_truncation(self, five_index):
        result = rank(five_index, Query.from_text("q", "report"), "bm25", k=2)
        assert len(result.entries) == 2
        assert [e.rank for e in result.entries] == [1, 2]

    def test_unknown_model_rejected(self, five_index):
        with pytest.raises(ValueError, match="unknown model"):
            rank(five_index, Query.from_text("q", "report"), "tfidf", k=5)

    def test_score_order_invariance(self, five_index):
        # scaling all scores by a positive constant cannot change argsort
        result = rank(five_index, Query.from_text("q", "volcano eruption"), "bm25", k=5)
        scaled = RankedList.from_scores(
            "q", {e.doc_id: 7.3 * e.score for e in result.entries}
        )
        assert scaled.doc_ids == result.doc_ids

    def test_adding_unrelated_doc_preserves_order(self, small_docs, small_index):
        query = Query.from_text("q", "volcano eruption lava")
        before = rank(small_index, query, "bm25", k=30)
        unrelated = Document.from_text("ZZZZ", "opera soprano aria libretto tenor " * 10)
        index2 = build_index(list(small_docs) + [unrelated])
        after = rank(index2, query, "bm25", k=30)
        assert [d for d in after.doc_ids if d != "ZZZZ"] == before.doc_ids


class TestTypes:
    def test_weighted_query_rejects_bad_weights(self):
        with pytest.raises(ValueError):
            WeightedQuery("q", {"a": -1.0})
        with pytest.raises(ValueError):
            WeightedQuery("q", {"a": math.inf})

    def test_as_weighted_counts_terms_and_drops_stopwords(self):
        query = Query.from_text("q", "the volcano volcano ash")
        weighted = as_weighted(query)
        assert weighted.term_weights == {"volcano": 2.0, "ash": 1.0}

    def test_ranked_list_ranks_consecutive(self):
        rl = RankedList.from_scores("q", {"a": 1.0, "b": 3.0, "c": 2.0})
        assert [e.rank for e in rl.entries] == [1, 2, 3]
        assert rl.doc_ids == ["b", "c", "a"]
        scores = [e.score for e in rl.entries]
        assert scores == sorted(scores, reverse=True)

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bertqe.corpus import (
    Document,
    corpus_by_id,
    decompose_chunks,
    decompose_passages,
    load_corpus,
)


def doc_of_length(n: int, doc_id: str = "d") -> Document:
    return Document.from_text(doc_id, " ".join(f"t{i}" for i in range(n)))


class TestPassages:
    def test_80_token_doc(self):
        passages = decompose_passages(doc_of_length(80))
        assert [(p.start, len(p.tokens)) for p in passages] == [(0, 80), (50, 30)]

    def test_100_token_doc(self):
        passages = decompose_passages(doc_of_length(100))
        assert [(p.start, len(p.tokens)) for p in passages] == [(0, 100), (50, 50)]

    def test_523_token_doc(self):
        # oracle: enumerate starts 0, 50, ... < 523
        expected_starts = [s for s in range(0, 523, 50)]
        passages = decompose_passages(doc_of_length(523))
        assert len(passages) == 11
        assert [p.start for p in passages] == expected_starts

    def test_empty_doc(self):
        assert decompose_passages(doc_of_length(0)) == []

    def test_rejects_bad_window(self):
        with pytest.raises(ValueError):
            decompose_passages(doc_of_length(10), window=0)
        with pytest.raises(ValueError):
            decompose_passages(doc_of_length(10), window=10, stride=20)

    @given(n=st.integers(0, 600), window=st.integers(1, 120), stride=st.integers(1, 120))
    def test_coverage_and_content(self, n, window, stride):
        if stride > window:
            stride = window
        doc = doc_of_length(n)
        passages = decompose_passages(doc, window=window, stride=stride)
        covered = set()
        for p in passages:
            assert p.tokens == doc.tokens[p.start : p.start + window]
            covered.update(range(p.start, p.start + len(p.tokens)))
        assert covered == set(range(n))


class TestChunks:
    def test_short_doc_single_chunk(self):
        chunks = decompose_chunks(doc_of_length(7), m=10)
        assert [(c.start, len(c.tokens)) for c in chunks] == [(0, 7)]

    def test_23_token_doc(self):
        # oracle: starts 0,5,10,15 kept with lengths 10,10,10,8; 20 dropped
        chunks = decompose_chunks(doc_of_length(23), m=10)
        assert [(c.start, len(c.tokens)) for c in chunks] == [
            (0, 10), (5, 10), (10, 10), (15, 8),
        ]

    def test_100_token_doc(self):
        chunks = decompose_chunks(doc_of_length(100), m=10)
        assert len(chunks) == 19
        assert [c.start for c in chunks] == list(range(0, 95, 5))

    def test_doc_shorter_than_min_still_kept(self):
        chunks = decompose_chunks(doc_of_length(3), m=10)
        assert [(c.start, len(c.tokens)) for c in chunks] == [(0, 3)]

    def test_rejects_tiny_m(self):
        with pytest.raises(ValueError):
            decompose_chunks(doc_of_length(5), m=1)

    @given(n=st.integers(1, 400), m=st.integers(2, 40))
    def test_chunk_invariants(self, n, m):
        doc = doc_of_length(n)
        chunks = decompose_chunks(doc, m=m)
        stride = m // 2
        min_len = (m + 1) // 2
        assert chunks, "a non-empty document always yields at least one chunk"
        for c in chunks:
            assert len(c.tokens) <= m
            assert c.tokens == doc.tokens[c.start : c.start + m]
            assert c.start % stride == 0
        if len(chunks) > 1:
            for c in chunks:
                assert len(c.tokens) >= min_len
        # full-length even-m neighbors share exactly m/2 tokens
        if m % 2 == 0:
            for a, b in zip(chunks, chunks[1:]):
                if len(a.tokens) == m and len(b.tokens) == m and b.start - a.start == stride:
                    assert a.tokens[stride:] == b.tokens[:stride]
        # concatenating at stride boundaries reproduces the covered prefix
        rebuilt = list(chunks[0].tokens[:stride]) if len(chunks) > 1 else list(chunks[0].tokens)
        if len(chunks) > 1:
            for c in chunks[1:-1]:
                rebuilt.extend(c.tokens[:stride])
            rebuilt = [t for c in chunks[:-1] for t in c.tokens[:stride]] + list(chunks[-1].tokens)
        assert rebuilt == list(doc.tokens[: len(rebuilt)])

    @given(n=st.integers(0, 200))
    def test_deterministic(self, n):
        doc = doc_of_length(n)
        if n == 0:
            assert decompose_chunks(doc, m=10) == []
        else:
            assert decompose_chunks(doc, m=10) == decompose_chunks(doc, m=10)


class TestCorpusIO:
    def test_load_corpus_roundtrip(self, tmp_path, small_docs):
        path = tmp_path / "corpus.tsv"
        with open(path, "w", encoding="utf-8") as fh:
            for doc in small_docs:
                fh.write(f"{doc.doc_id}\t{doc.text}\n")
        loaded = load_corpus(path)
        assert [(d.doc_id, d.text, d.tokens) for d in loaded] == [
            (d.doc_id, d.text, d.tokens) for d in small_docs
        ]

    def test_load_corpus_rejects_bad_line(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("no-tab-here\n", encoding="utf-8")
        with pytest.raises(ValueError, match="doc_id"):
            load_corpus(path)

    def test_duplicate_doc_id_rejected(self):
        docs = [Document.from_text("d1", "a"), Document.from_text("d1", "b")]
        with pytest.raises(ValueError, match="d1"):
            corpus_by_id(docs)

    def test_token_count(self):
        doc = Document.from_text("d", "Alpha beta-gamma")
        assert doc.token_count == 3

"""Inverted index with the collection statistics the rankers need."""

from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path
from typing import Dict, Iterable, List, Tuple

from .corpus import Document

MAGIC = "BERTQE-INDEX"
FORMAT_VERSION = 1


class InvertedIndex:
    """Immutable term -> (doc, tf) index plus per-document and collection stats.

    Built once by :func:`build_index`; afterwards safe to share across
    concurrent readers.
    """

    def __init__(
        self,
        postings: Dict[str, Dict[str, int]],
        doc_lengths: Dict[str, int],
    ) -> None:
        self._postings = postings
        self._doc_lengths = doc_lengths
        self._num_docs = len(doc_lengths)
        self._total_tokens = sum(doc_lengths.values())
        self._cf = {term: sum(tfs.values()) for term, tfs in postings.items()}

    # -- collection statistics -------------------------------------------

    @property
    def num_docs(self) -> int:
        return self._num_docs

    @property
    def total_tokens(self) -> int:
        return self._total_tokens

    @property
    def avg_doc_length(self) -> float:
        return self._total_tokens / self._num_docs if self._num_docs else 0.0

    @property
    def vocabulary(self) -> Iterable[str]:
        return self._postings.keys()

    def df(self, term: str) -> int:
        """Number of documents containing *term*."""
        return len(self._postings.get(term, ()))

    def cf(self, term: str) -> int:
        """Total occurrences of *term* in the collection."""
        return self._cf.get(term, 0)

    def doc_length(self, doc_id: str) -> int:
        return self._doc_lengths[doc_id]

    @property
    def doc_ids(self) -> Iterable[str]:
        return self._doc_lengths.keys()

    # -- postings access ---------------------------------------------------

    def postings(self, term: str) -> List[Tuple[str, int]]:
        """(doc_id, tf) pairs for *term*, sorted by doc_id."""
        return sorted(self._postings.get(term, {}).items())

    def tf(self, term: str, doc_id: str) -> int:
        return self._postings.get(term, {}).get(doc_id, 0)

    def matching_docs(self, terms: Iterable[str]) -> List[str]:
        """Doc ids containing at least one of *terms*, sorted ascending."""
        hits = set()
        for term in terms:
            hits.update(self._postings.get(term, ()))
        return sorted(hits)

    def idf(self, term: str) -> float:
        """Smoothed inverse document frequency, always positive."""
        return math.log((1 + self._num_docs) / (1 + self.df(term))) + 1.0

    # -- persistence -------------------------------------------------------

    def save(self, path: str | Path) -> None:
        payload = {
            "postings": {t: sorted(d.items()) for t, d in self._postings.items()},
            "doc_lengths": self._doc_lengths,
        }
        body = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        header = f"{MAGIC}\t{FORMAT_VERSION}\n"
        atomic_write_text(path, header + body + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "InvertedIndex":
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().rstrip("\n")
            parts = header.split("\t")
            if len(parts) != 2 or parts[0] != MAGIC:
                raise ValueError(f"{path}: not an index file (bad magic header)")
            if int(parts[1]) != FORMAT_VERSION:
                raise ValueError(f"{path}: unsupported index version {parts[1]}")
            payload = json.loads(fh.read())
        postings = {t: dict(pairs) for t, pairs in payload["postings"].items()}
        return cls(postings=postings, doc_lengths=payload["doc_lengths"])


def build_index(docs: Iterable[Document]) -> InvertedIndex:
    """Build an :class:`InvertedIndex` over *docs*; doc ids must be unique."""
    postings: Dict[str, Dict[str, int]] = {}
    doc_lengths: Dict[str, int] = {}
    for doc in docs:
        if doc.doc_id in doc_lengths:
            raise ValueError(f"duplicate doc_id: {doc.doc_id!r}")
        doc_lengths[doc.doc_id] = doc.token_count
        for token in doc.tokens:
            postings.setdefault(token, {})
            postings[token][doc.doc_id] = postings[token].get(doc.doc_id, 0) + 1
    return InvertedIndex(postings=postings, doc_lengths=doc_lengths)


def atomic_write_text(path: str | Path, text: str) -> None:
    """Write *text* to *path* via a temp file + rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise

"""Documents and their decomposition into overlapping passages and chunks."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Tuple

from .textutils import tokenize


@dataclass(frozen=True)
class Document:
    doc_id: str
    text: str
    tokens: Tuple[str, ...] = field(default=(), compare=False)

    @classmethod
    def from_text(cls, doc_id: str, text: str) -> "Document":
        return cls(doc_id=doc_id, text=text, tokens=tuple(tokenize(text)))

    @property
    def token_count(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class Passage:
    doc_id: str
    start: int
    tokens: Tuple[str, ...]

    @property
    def text(self) -> str:
        return " ".join(self.tokens)


@dataclass(frozen=True)
class Chunk:
    doc_id: str
    start: int
    tokens: Tuple[str, ...]

    @property
    def end(self) -> int:
        return self.start + len(self.tokens)

    @property
    def text(self) -> str:
        return " ".join(self.tokens)


def decompose_passages(doc: Document, window: int = 100, stride: int = 50) -> List[Passage]:
    """Split a document into overlapping passages of ``window`` tokens.

    Passage starts are 0, stride, 2*stride, ... while start < token_count,
    so every token is covered and the last passage may be shorter.
    """
    if window <= 0 or stride <= 0:
        raise ValueError("window and stride must be positive")
    if stride > window:
        raise ValueError("stride must not exceed window")
    passages = []
    for start in range(0, doc.token_count, stride):
        passages.append(Passage(doc.doc_id, start, doc.tokens[start : start + window]))
    return passages


def decompose_chunks(doc: Document, m: int = 10) -> List[Chunk]:
    """Split a document into chunks of at most ``m`` tokens at stride m//2.

    Trailing fragments are dropped when they are shorter than ceil(m/2) or
    add no tokens beyond the previous chunk; a document shorter than the
    minimum still yields its single chunk.
    """
    if m < 2:
        raise ValueError("chunk length m must be at least 2")
    stride = m // 2
    min_len = (m + 1) // 2
    chunks: List[Chunk] = []
    for start in range(0, doc.token_count, stride):
        tokens = doc.tokens[start : start + m]
        if chunks and (len(tokens) < min_len or start + len(tokens) <= chunks[-1].end):
            continue
        chunks.append(Chunk(doc.doc_id, start, tokens))
    return chunks


def load_corpus(path: str | Path) -> List[Document]:
    """Read a corpus file with one ``doc_id<TAB>text`` record per line."""
    docs: List[Document] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            if "\t" not in line:
                raise ValueError(f"{path}:{line_no}: expected 'doc_id<TAB>text'")
            doc_id, text = line.split("\t", 1)
            docs.append(Document.from_text(doc_id, text))
    return docs


def corpus_by_id(docs: Iterable[Document]) -> Dict[str, Document]:
    out: Dict[str, Document] = {}
    for doc in docs:
        if doc.doc_id in out:
            raise ValueError(f"duplicate doc_id: {doc.doc_id!r}")
        out[doc.doc_id] = doc
    return out

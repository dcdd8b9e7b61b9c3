"""Writers for the experiment file formats, shared by CLI-facing tests."""

from __future__ import annotations

from pathlib import Path
from typing import List

from bertqe.corpus import Document
from bertqe.evaluation import Qrels
from bertqe.lexical import Query


def write_corpus_file(docs: List[Document], path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(f"{doc.doc_id}\t{doc.text}\n")


def write_queries_file(queries: List[Query], path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for q in queries:
            fh.write(f"{q.query_id}\t{q.text}\n")


def write_qrels_file(qrels: Qrels, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for qid in qrels.query_ids:
            for did, grade in sorted(qrels.grades_for(qid).items()):
                fh.write(f"{qid} 0 {did} {grade}\n")

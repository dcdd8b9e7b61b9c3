"""Reading and writing the TREC-format experiment files.

Run file lines: ``query_id Q0 doc_id rank score tag``.
Qrels lines: ``query_id 0 doc_id grade``.
Fold lines: ``fold_index query_id``.
Query files: ``query_id<TAB>text``. All UTF-8.
"""

from __future__ import annotations

from pathlib import Path
from typing import Dict, List, Mapping, Tuple

from .evaluation import Qrels
from .index import atomic_write_text
from .lexical import Query, RankedList, RunEntry

SCORE_FORMAT = "{:.6f}"


def format_run(runs: Mapping[str, RankedList], tag: str = "bertqe") -> str:
    lines = []
    for qid in sorted(runs):
        for entry in runs[qid].entries:
            score = SCORE_FORMAT.format(entry.score)
            lines.append(f"{qid} Q0 {entry.doc_id} {entry.rank} {score} {tag}")
    return "\n".join(lines) + ("\n" if lines else "")


def write_run(path: str | Path, runs: Mapping[str, RankedList], tag: str = "bertqe") -> None:
    atomic_write_text(path, format_run(runs, tag))


def read_run(path: str | Path) -> Dict[str, RankedList]:
    """Parse a run file into one RankedList per query."""
    per_query: Dict[str, List[Tuple[int, str, float]]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 6:
                raise ValueError(f"{path}:{line_no}: expected 6 fields, got {len(parts)}")
            qid, _, did, rank, score, _tag = parts
            per_query.setdefault(qid, []).append((int(rank), did, float(score)))
    runs = {}
    for qid, rows in per_query.items():
        rows.sort()
        entries = tuple(RunEntry(doc_id=d, score=s, rank=r) for r, d, s in rows)
        runs[qid] = RankedList(query_id=qid, entries=entries)
    return runs


def read_queries(path: str | Path) -> List[Query]:
    queries = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            if "\t" not in line:
                raise ValueError(f"{path}:{line_no}: expected 'query_id<TAB>text'")
            qid, text = line.split("\t", 1)
            queries.append(Query.from_text(qid, text))
    return queries


def read_qrels(path: str | Path) -> Qrels:
    judgments: Dict[Tuple[str, str], int] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 4:
                raise ValueError(f"{path}:{line_no}: expected 4 fields, got {len(parts)}")
            qid, _, did, grade = parts
            judgments[(qid, did)] = int(grade)
    return Qrels(judgments)


def read_folds(path: str | Path) -> Dict[str, int]:
    """Fold file as a qid -> fold-index mapping; duplicates are rejected."""
    mapping: Dict[str, int] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 2:
                raise ValueError(f"{path}:{line_no}: expected 'fold_index query_id'")
            fold, qid = int(parts[0]), parts[1]
            if qid in mapping:
                raise ValueError(f"{path}:{line_no}: duplicate query id {qid!r}")
            mapping[qid] = fold
    return mapping


def write_folds(path: str | Path, folds) -> None:
    lines = []
    for i, fold in enumerate(folds.folds):
        for qid in fold:
            lines.append(f"{i} {qid}")
    atomic_write_text(path, "\n".join(lines) + ("\n" if lines else ""))

"""Tokenization and the embedded stopword list.

All text handling in the toolkit goes through :func:`tokenize` so that
document statistics, passage/chunk boundaries, and scorer inputs agree on
what a "word" is.
"""

from __future__ import annotations

import re
from typing import List

_TOKEN_RE = re.compile(r"[a-z0-9]+")

# Small fixed stopword list; applied only where a ranker asks for it.
STOPWORDS = frozenset(
    """
    a an and are as at be but by for from has have he her his if in into is
    it its no not of on or she such that the their them then there these
    they this to was were will with
    """.split()
)


def tokenize(text: str) -> List[str]:
    """Lowercase and split *text* into alphanumeric tokens.

    Splits on every non-alphanumeric character; deterministic for
    identical input bytes. Empty input yields an empty list.
    """
    return _TOKEN_RE.findall(text.lower())


def remove_stopwords(tokens: List[str]) -> List[str]:
    return [t for t in tokens if t not in STOPWORDS]

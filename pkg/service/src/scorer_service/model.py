"""Relevance models behind the scoring service.

The default model is a deterministic seeded logistic scorer over hashed
term-overlap features: no weights to download, identical scores for
identical requests under a fixed seed. A checkpoint path can be supplied
to load an externally trained model instead; loading failures leave the
service in a degraded state rather than crashing it.
"""

from __future__ import annotations

import hashlib
import math
import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Protocol, Sequence, Tuple

PROB_FLOOR = 1e-6
_TOKEN = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> List[str]:
    return _TOKEN.findall(text.lower())


def truncate_tokens(
    a: Sequence[str], b: Sequence[str], max_length: int
) -> Tuple[List[str], List[str]]:
    """Fit both sides into a combined token budget, document side first."""
    a = list(a)[:max_length]
    b = list(b)[: max(0, max_length - len(a))]
    return a, b


def sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def clamp(p: float) -> float:
    return min(max(p, PROB_FLOOR), 1.0 - PROB_FLOOR)


class RelevanceModel(Protocol):
    name: str

    def score_pairs(self, pairs: Sequence[Tuple[str, str]]) -> List[float]:
        """One probability in (0, 1) per pair, preserving order."""


@dataclass
class HashedOverlapModel:
    """Seeded logistic model over term-overlap features.

    Each vocabulary term gets a stable pseudo-random weight in
    [0.5, 1.5] derived from blake2b(term, seed), so scores are fully
    determined by (seed, request) and never depend on process state.
    """

    seed: int = 0
    max_length: int = 384
    gain: float = 4.0
    shift: float = -2.0

    @property
    def name(self) -> str:
        return f"hashed-overlap/seed{self.seed}"

    def _weight(self, term: str) -> float:
        digest = hashlib.blake2b(
            term.encode("utf-8"), digest_size=8, salt=str(self.seed).encode("utf-8")[:16]
        ).digest()
        return 0.5 + int.from_bytes(digest, "big") % 1000 / 1000.0

    def score_pairs(self, pairs: Sequence[Tuple[str, str]]) -> List[float]:
        return [self._score(a, b) for a, b in pairs]

    def _score(self, text_a: str, text_b: str) -> float:
        a, b = truncate_tokens(tokenize(text_a), tokenize(text_b), self.max_length)
        tf_b = Counter(b)
        terms = sorted(set(a))
        denom = sum(self._weight(t) for t in terms)
        if denom > 0:
            s = sum(
                self._weight(t) * (1.0 + math.log(tf_b[t])) for t in terms if tf_b[t]
            ) / denom
        else:
            s = 0.0
        return clamp(sigmoid(self.gain * s + self.shift))


class ModelLoadError(Exception):
    pass


def load_model(
    checkpoint: Optional[str] = None, seed: int = 0, max_length: int = 384
) -> RelevanceModel:
    """Return the default seeded model, or load an external checkpoint.

    External checkpoints are deliberately out of scope for the bundled
    model; a missing or unreadable path raises ModelLoadError so the
    service can report a degraded state.
    """
    if checkpoint is None:
        return HashedOverlapModel(seed=seed, max_length=max_length)
    path = Path(checkpoint)
    if not path.exists():
        raise ModelLoadError(f"checkpoint not found: {checkpoint}")
    raise ModelLoadError(
        f"no loader available for checkpoint {checkpoint}; "
        "plug a RelevanceModel into create_app instead"
    )

"""Transformer parameter-count and FLOPs estimation for pipeline
configurations.

Parameter counts use the standard encoder accounting: token, position, and
segment embedding tables plus their layer norm; per layer 4H^2 attention
projections and 8H^2 feed-forward weights with biases and two layer norms;
and the H^2 pooler.

Forward FLOPs count 2 multiply-accumulate FLOPs per non-embedding weight
per token, plus the sequence-quadratic attention score/mixing term
(4 * layers * seq^2 * hidden). Embedding lookups are table reads, not
floating-point work, and are excluded.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Tuple

VOCAB_SIZE = 30522
POSITION_EMBEDDINGS = 512
SEGMENT_TYPES = 2
MAX_SEQ = 384


@dataclass(frozen=True)
class VariantSpec:
    """One transformer size: layer count, hidden size, attention heads."""

    name: str
    layers: int
    hidden: int
    heads: int
    vocab: int = VOCAB_SIZE
    max_seq: int = MAX_SEQ


VARIANTS: Dict[str, VariantSpec] = {
    "T": VariantSpec("Tiny", layers=2, hidden=128, heads=2),
    "S": VariantSpec("Small", layers=4, hidden=256, heads=4),
    "M": VariantSpec("Medium", layers=8, hidden=512, heads=8),
    "B": VariantSpec("Base", layers=12, hidden=768, heads=12),
    "L": VariantSpec("Large", layers=24, hidden=1024, heads=16),
}

_BY_NAME = {v.name.lower(): v for v in VARIANTS.values()}


def variant(key: str) -> VariantSpec:
    """Look up a variant by letter (``L``) or name (``large``)."""
    if key.upper() in VARIANTS:
        return VARIANTS[key.upper()]
    if key.lower() in _BY_NAME:
        return _BY_NAME[key.lower()]
    raise ValueError(f"unknown variant {key!r}")


def _per_layer_params(h: int) -> int:
    attention = 4 * h * h + 4 * h      # q, k, v, output projections + biases
    feed_forward = 8 * h * h + 4 * h + h
    layer_norms = 2 * 2 * h
    return attention + feed_forward + layer_norms


def param_count(v: VariantSpec) -> int:
    """Total trainable parameters of the encoder."""
    embeddings = (v.vocab + POSITION_EMBEDDINGS + SEGMENT_TYPES) * v.hidden + 2 * v.hidden
    pooler = v.hidden * v.hidden + v.hidden
    return embeddings + v.layers * _per_layer_params(v.hidden) + pooler


def non_embedding_params(v: VariantSpec) -> int:
    """Parameters touched by matrix multiplies in the forward pass."""
    pooler = v.hidden * v.hidden + v.hidden
    return v.layers * _per_layer_params(v.hidden) + pooler


def flops_forward(v: VariantSpec, seq_len: int) -> float:
    """Forward-pass FLOPs for one sequence of ``seq_len`` tokens."""
    if not 1 <= seq_len <= v.max_seq:
        raise ValueError(f"seq_len must lie in [1, {v.max_seq}]")
    dense = 2.0 * seq_len * non_embedding_params(v)
    attention = 4.0 * v.layers * seq_len * seq_len * v.hidden
    return dense + attention


@dataclass(frozen=True)
class Workload:
    """Per-query workload assumptions behind a FLOPs estimate.

    Defaults model the canonical setup: the top 1000 documents re-scored
    at full length in phases one and three, and short chunk pairs in
    phase two (240 candidate chunks per feedback document).
    """

    depth: int = 1000
    chunks_per_doc: int = 240
    k_d: int = 10
    k_c: int = 10
    seq_phase1: int = MAX_SEQ
    seq_phase2: int = 32
    seq_phase3: int = MAX_SEQ

    def validate(self) -> None:
        if min(self.depth, self.chunks_per_doc, self.k_d, self.k_c) < 1:
            raise ValueError("workload counts must be positive")
        if min(self.seq_phase1, self.seq_phase2, self.seq_phase3) < 1:
            raise ValueError("sequence lengths must be positive")


@dataclass(frozen=True)
class CostReport:
    configuration: str
    phase_flops: Tuple[float, float, float]
    total_flops: float
    baseline_flops: float
    ratio: float

    def to_dict(self) -> dict:
        return {
            "configuration": self.configuration,
            "phase_flops": list(self.phase_flops),
            "total_flops": self.total_flops,
            "baseline_flops": self.baseline_flops,
            "ratio": self.ratio,
        }


def parse_configuration(name: str) -> Tuple[VariantSpec, VariantSpec, VariantSpec]:
    """Parse a three-letter per-phase configuration such as ``LLS``."""
    if len(name) != 3:
        raise ValueError(f"configuration must be three variant letters, got {name!r}")
    return tuple(variant(c) for c in name)  # type: ignore[return-value]


def pipeline_flops(
    configuration: str,
    workload: Workload = Workload(),
    baseline_variant: str = "L",
) -> CostReport:
    """Per-query FLOPs of a three-phase configuration, with its ratio to a
    single-phase re-ranker using ``baseline_variant``."""
    workload.validate()
    v1, v2, v3 = parse_configuration(configuration)
    phase1 = workload.depth * flops_forward(v1, workload.seq_phase1)
    phase2 = workload.k_d * workload.chunks_per_doc * flops_forward(v2, workload.seq_phase2)
    phase3 = workload.k_c * workload.depth * flops_forward(v3, workload.seq_phase3)
    baseline = workload.depth * flops_forward(variant(baseline_variant), workload.seq_phase1)
    total = phase1 + phase2 + phase3
    return CostReport(
        configuration=configuration,
        phase_flops=(phase1, phase2, phase3),
        total_flops=total,
        baseline_flops=baseline,
        ratio=total / baseline,
    )


#: Three-phase configurations reported with relative cost, in published order.
REPORTED_CONFIGURATIONS = (
    "LLL", "LTL", "LSL", "LML", "LBL",
    "LMT", "LMS", "LMM", "LMB",
    "LLT", "LLS", "LLM", "LLB",
)

REPORTED_RATIOS: Dict[str, float] = {
    "LLL": 11.19,
    "LTL": 11.00,
    "LSL": 11.00,
    "LML": 11.01,
    "LBL": 11.05,
    "LMT": 1.03,
    "LMS": 1.12,
    "LMM": 1.85,
    "LMB": 3.83,
    "LLT": 1.20,
    "LLS": 1.30,
    "LLM": 2.03,
    "LLB": 4.01,
}


def cost_table(workload: Workload = Workload()) -> List[CostReport]:
    """Cost reports for every reported configuration, in published order."""
    return [pipeline_flops(name, workload) for name in REPORTED_CONFIGURATIONS]

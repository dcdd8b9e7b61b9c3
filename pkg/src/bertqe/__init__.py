"""Chunk-based pseudo-relevance-feedback re-ranking toolkit."""

from .corpus import (
    Chunk,
    Document,
    Passage,
    corpus_by_id,
    decompose_chunks,
    decompose_passages,
    load_corpus,
)
from .index import InvertedIndex, build_index
from .lexical import Query, RankedList, RunEntry, WeightedQuery, rank
from .expansion import dph_kl_pipeline, kl_expand, rm3_expand
from .scoring import (
    CachingScorer,
    MockLexicalScorer,
    RemoteScorer,
    ScorePair,
    Scorer,
    score_document_maxp,
)
from .pipeline import (
    BertQE,
    BertQEResult,
    ChunkSet,
    PhaseScorers,
    PipelineConfig,
    combine,
    feedback_score,
    interpolate_initial,
    phase_one,
    run_bertqe,
    select_chunks,
)
from .evaluation import (
    FoldPlan,
    Qrels,
    cross_validate,
    grid_search_interpolation,
    make_folds,
    map_at_k,
    ndcg_at_k,
    paired_ttest,
    precision_at_k,
)
from .costmodel import VariantSpec, VARIANTS, flops_forward, param_count, pipeline_flops

__version__ = "0.1.0"

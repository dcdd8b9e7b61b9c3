"""Standalone relevance-scoring service speaking the bertqe scorer wire
protocol (``POST /score``, ``GET /health``)."""

from .app import BATCH_LIMIT, MAX_SEQ_LENGTH, ServiceConfig, create_app
from .model import (
    HashedOverlapModel,
    ModelLoadError,
    RelevanceModel,
    load_model,
)

__version__ = "0.1.0"

__all__ = [
    "BATCH_LIMIT",
    "MAX_SEQ_LENGTH",
    "ServiceConfig",
    "create_app",
    "HashedOverlapModel",
    "ModelLoadError",
    "RelevanceModel",
    "load_model",
    "__version__",
]

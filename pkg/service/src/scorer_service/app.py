"""HTTP scoring service.

Wire protocol:
  POST /score   {"pairs": [{"a": "...", "b": "..."}]} -> {"scores": [...]}
  GET  /health  -> {"status": "ok" | "degraded", "model": "..."}

Error responses carry a machine-readable body
``{"error": {"code": "...", "message": "..."}}``: malformed requests get
400, batches over the configured limit get 413, and model failures 500.
"""

from __future__ import annotations

import argparse
import os
from dataclasses import dataclass
from typing import List, Optional, Tuple

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .model import ModelLoadError, RelevanceModel, load_model

MAX_SEQ_LENGTH = 384
BATCH_LIMIT = 256


@dataclass(frozen=True)
class ServiceConfig:
    checkpoint: Optional[str] = None
    max_length: int = MAX_SEQ_LENGTH
    batch_limit: int = BATCH_LIMIT
    host: str = "127.0.0.1"
    port: int = 8000
    seed: int = 0

    def validate(self) -> None:
        if not 1 <= self.max_length <= MAX_SEQ_LENGTH:
            raise ValueError(f"max_length must lie in [1, {MAX_SEQ_LENGTH}]")
        if self.batch_limit < 1:
            raise ValueError("batch_limit must be >= 1")


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(
        status_code=status, content={"error": {"code": code, "message": message}}
    )


def _parse_pairs(payload) -> List[Tuple[str, str]]:
    """Validate a request body into (a, b) pairs; ValueError on any defect."""
    if not isinstance(payload, dict):
        raise ValueError("request body must be a JSON object")
    if "pairs" not in payload:
        raise ValueError("missing required field 'pairs'")
    pairs = payload["pairs"]
    if not isinstance(pairs, list):
        raise ValueError("'pairs' must be a list")
    out = []
    for i, item in enumerate(pairs):
        if not isinstance(item, dict) or "a" not in item or "b" not in item:
            raise ValueError(f"pairs[{i}] must be an object with fields 'a' and 'b'")
        a, b = item["a"], item["b"]
        if not isinstance(a, str) or not isinstance(b, str):
            raise ValueError(f"pairs[{i}]: 'a' and 'b' must be strings")
        out.append((a, b))
    return out


def create_app(
    config: ServiceConfig = ServiceConfig(), model: Optional[RelevanceModel] = None
) -> FastAPI:
    config.validate()
    app = FastAPI(title="bertqe scorer service")
    load_error: Optional[str] = None
    if model is None:
        try:
            model = load_model(
                checkpoint=config.checkpoint,
                seed=config.seed,
                max_length=config.max_length,
            )
        except ModelLoadError as exc:
            load_error = str(exc)
            model = None

    @app.get("/health")
    def health():
        if model is None:
            return {"status": "degraded", "model": None, "reason": load_error}
        return {"status": "ok", "model": model.name}

    @app.post("/score")
    async def score(request: Request):
        try:
            payload = await request.json()
        except Exception:
            return _error(400, "malformed_json", "request body is not valid JSON")
        try:
            pairs = _parse_pairs(payload)
        except ValueError as exc:
            return _error(400, "invalid_request", str(exc))
        if len(pairs) > config.batch_limit:
            return _error(
                413,
                "batch_too_large",
                f"batch of {len(pairs)} exceeds limit {config.batch_limit}",
            )
        if model is None:
            return _error(500, "model_unavailable", load_error or "model not loaded")
        try:
            scores = model.score_pairs(pairs)
        except Exception as exc:
            return _error(500, "model_failure", str(exc))
        if len(scores) != len(pairs) or not all(0.0 < s < 1.0 for s in scores):
            return _error(500, "model_failure", "model returned an invalid score batch")
        return {"scores": scores}

    return app


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(prog="bertqe-scorer-service", description=__doc__)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8000)
    parser.add_argument("--checkpoint", default=os.environ.get("SCORER_CHECKPOINT"))
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--batch-limit", type=int, default=BATCH_LIMIT)
    parser.add_argument("--max-length", type=int, default=MAX_SEQ_LENGTH)
    args = parser.parse_args(argv)
    config = ServiceConfig(
        checkpoint=args.checkpoint,
        max_length=args.max_length,
        batch_limit=args.batch_limit,
        host=args.host,
        port=args.port,
        seed=args.seed,
    )
    import uvicorn

    uvicorn.run(create_app(config), host=config.host, port=config.port)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

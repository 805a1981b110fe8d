"""FastAPI app implementing the paragraph-scoring wire protocol."""

from __future__ import annotations

from fastapi import FastAPI
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .config import ScorerConfig
from .model import load_heads


class ParagraphIn(BaseModel):
    id: str
    text: str


class ScoreRequest(BaseModel):
    theme: str
    paragraphs: list[ParagraphIn]


def create_app(config: ScorerConfig) -> FastAPI:
    heads = load_heads(config.heads)  # fail at startup, not first request
    app = FastAPI(title="reference scorer")

    @app.get("/health")
    def health():
        return {"status": "ok", "scorer_meta": config.scorer_meta}

    @app.post("/score")
    def score(request: ScoreRequest):
        if len(request.paragraphs) > config.batch_size:
            return JSONResponse(
                status_code=413,
                content={
                    "detail": f"batch of {len(request.paragraphs)} exceeds the maximum",
                    "max_batch_size": config.batch_size,
                },
            )
        head = heads.get(request.theme)
        if head is None:
            return JSONResponse(
                status_code=422,
                content={"detail": f"no classifier head for theme {request.theme!r}"},
            )
        texts = [p.text for p in request.paragraphs]
        values = head.score(texts) if texts else []
        return {
            "scores": [
                {"id": p.id, "score": value} for p, value in zip(request.paragraphs, values)
            ],
            "scorer_meta": config.scorer_meta,
        }

    return app

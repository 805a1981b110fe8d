"""Loading serialized classifier heads and turning texts into bounded scores."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import joblib


class ModelLoadError(Exception):
    pass


class ThemeHead:
    """One binary classifier pipeline; emits the positive-class probability."""

    def __init__(self, pipeline):
        if not hasattr(pipeline, "predict_proba"):
            raise ModelLoadError("classifier head must expose predict_proba")
        self._pipeline = pipeline

    @classmethod
    def load(cls, path: Path | str) -> "ThemeHead":
        path = Path(path)
        if not path.exists():
            raise ModelLoadError(f"classifier head not found: {path}")
        try:
            return cls(joblib.load(path))
        except ModelLoadError:
            raise
        except Exception as exc:
            raise ModelLoadError(f"cannot load classifier head {path}: {exc}") from exc

    def score(self, texts: Sequence[str]) -> list[float]:
        probabilities = self._pipeline.predict_proba(list(texts))
        positive = probabilities[:, -1]
        return [min(1.0, max(0.0, float(p))) for p in positive]


def load_heads(paths: dict) -> dict:
    return {code: ThemeHead.load(path) for code, path in paths.items()}

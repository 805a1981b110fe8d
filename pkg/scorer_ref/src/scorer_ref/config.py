"""Service configuration: which classifier head answers for which theme."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class ScorerConfig:
    model_id: str
    heads: dict  # theme code -> path to a serialized classifier pipeline
    batch_size: int = 64
    device: str = "cpu"  # hint only; the sklearn backend ignores it
    version: str = "1"

    def __post_init__(self) -> None:
        if not self.heads:
            raise ConfigError("no classifier heads configured")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")

    @property
    def scorer_meta(self) -> dict:
        return {"name": self.model_id, "version": self.version}

    @classmethod
    def from_file(cls, path: Path | str) -> "ScorerConfig":
        path = Path(path)
        raw = json.loads(path.read_text(encoding="utf-8"))
        heads = {
            code: str((path.parent / head_path).resolve())
            for code, head_path in raw["heads"].items()
        }
        return cls(
            model_id=raw["model_id"],
            heads=heads,
            batch_size=int(raw.get("batch_size", 64)),
            device=raw.get("device", "cpu"),
            version=str(raw.get("version", "1")),
        )

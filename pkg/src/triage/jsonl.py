"""Line-delimited JSON record files, the persistence idiom for every artifact."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Iterator

from .errors import StateCorruptionError


def dump_record(record: dict) -> str:
    return json.dumps(record, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def write_records(path: Path | str, records: Iterable[dict]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(dump_record(record))
            fh.write("\n")


def read_records(path: Path | str) -> Iterator[dict]:
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError as exc:
                raise StateCorruptionError(f"{path}: invalid record at line {line_no}: {exc}") from exc


def append_record(path: Path | str, record: dict, fsync: bool = False) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(dump_record(record))
        fh.write("\n")
        if fsync:
            fh.flush()
            import os

            os.fsync(fh.fileno())

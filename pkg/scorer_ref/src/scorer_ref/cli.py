"""Run the reference scorer service from a config file."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ConfigError, ScorerConfig
from .model import ModelLoadError
from .service import create_app


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="scorer-ref")
    parser.add_argument("--config", required=True, type=Path, help="JSON config with model heads")
    parser.add_argument("--port", type=int, default=8901)
    parser.add_argument("--host", default="127.0.0.1")
    args = parser.parse_args(argv)

    try:
        config = ScorerConfig.from_file(args.config)
        app = create_app(config)
    except (ConfigError, ModelLoadError, OSError, KeyError, ValueError) as exc:
        print(f"startup error: {exc}", file=sys.stderr)
        return 1

    import uvicorn

    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

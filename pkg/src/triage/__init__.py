"""Locate theme-labeled passages in long trial transcripts and review disagreements."""

__version__ = "0.1.0"

from .annotations import Theme  # noqa: F401
from .corpus import Transcript, segment_transcript  # noqa: F401
from .pipeline import PipelineConfig  # noqa: F401

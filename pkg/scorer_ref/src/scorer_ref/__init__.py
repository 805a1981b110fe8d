"""Reference scorer service: pre-trained classifier heads behind POST /score."""

__version__ = "0.1.0"

from .config import ScorerConfig  # noqa: F401
from .service import create_app  # noqa: F401

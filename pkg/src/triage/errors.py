"""Exception types shared across the pipeline and review service."""

from __future__ import annotations


class TriageError(Exception):
    """Base class for every failure raised by this package."""


class IngestionError(TriageError):
    """Raw transcript input could not be decoded or identified."""


class TranscriptNotFoundError(TriageError):
    pass


class SchemaVersionError(TriageError):
    pass


class ConfigurationError(TriageError):
    pass


class InputError(TriageError):
    """Mismatched or incomplete inputs handed to a pure operation."""


class IncompleteScoresError(InputError):
    pass


class ScorerTransportError(TriageError):
    """A scorer batch failed in transit; safe to retry the named windows."""

    def __init__(self, message: str, window_ids: tuple[str, ...] = ()):
        super().__init__(message)
        self.window_ids = tuple(window_ids)


class ScorerProtocolError(TriageError):
    """The scorer answered, but the payload violates the wire contract."""


class ResolverTransportError(TriageError):
    """A resolver call failed in transit; safe to retry the named sentences."""

    def __init__(self, message: str, sentence_ids: tuple[int, ...] = ()):
        super().__init__(message)
        self.sentence_ids = tuple(sentence_ids)


class ItemNotFoundError(TriageError):
    pass


class ConflictError(TriageError):
    """Attempt to re-decide an already decided item."""


class DecisionValidationError(TriageError):
    pass


class StateCorruptionError(TriageError):
    pass


class StartupError(TriageError):
    pass

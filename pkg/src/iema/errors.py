"""Exception hierarchy shared across the engine."""


class IemaError(Exception):
    """Base class for every error raised by this package."""


class DataError(IemaError):
    """Malformed or inconsistent tabular input."""


class ModelError(IemaError):
    """Malformed model specification or schema mismatch."""


class CapabilityError(IemaError):
    """The model cannot perform the requested operation (e.g. refit)."""


class ExplanationError(IemaError):
    """Invalid arguments to an explanation computation."""


class GrammarError(IemaError):
    """Invalid grammar definition or symbol outside the alphabet."""


class StepRejectedError(IemaError):
    """A dialogue step the grammar does not permit at the current prefix.

    Carries the permitted terminals so callers can surface them verbatim.
    """

    def __init__(self, message: str, permitted: tuple[str, ...]):
        super().__init__(message)
        self.permitted = permitted


class ParameterError(IemaError):
    """A dialogue step with missing, unknown or ill-typed parameters."""


class SessionError(IemaError):
    """Session-level misuse (undo on empty history, unknown session, ...)."""


class ExportError(IemaError):
    """Bundle or HTML serialization failure."""

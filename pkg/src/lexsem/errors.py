"""Exception types shared across the engine."""


class RetrievalError(Exception):
    """Base class for all engine errors."""


class ParseError(RetrievalError):
    """A file did not match its declared format."""


class ValidationError(RetrievalError):
    """Input data violated a contract or invariant."""


class ProviderError(RetrievalError):
    """The embedding provider was unreachable or answered inconsistently."""

"""Exception types shared across the toolkit."""


class UwqError(ValueError):
    """Base class for all toolkit errors."""


class SaturationError(UwqError):
    """An associated-function supremum hit the stored truncation.

    Raised when a caller needs a trustworthy value but the maximizer sits at
    the end of the stored weight-sequence prefix, so the true supremum may
    lie beyond it.  Callers that can tolerate saturation inspect the flag on
    the returned result instead of calling through paths that raise.
    """


class TailBoundError(UwqError):
    """A truncated infinite product would drop a non-negligible tail."""


class OverflowDomainError(UwqError):
    """An exponential factor would overflow; reported, never clamped."""


class SchemaError(UwqError):
    """A config file violates the documented schema."""

"""Exception hierarchy shared by every engine in the package."""


class BergmanError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(BergmanError):
    """A presentation, ring map or binding table is malformed."""


class TypingError(BergmanError):
    """Colors, strand counts or index ranges do not line up."""


class NoMatchError(BergmanError):
    """A rule was addressed at a place where its left-hand side does not occur."""


class DivergenceError(BergmanError):
    """A rewriting loop exhausted its step budget."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace or []


class OrderViolationError(BergmanError):
    """A rewrite step failed to decrease the active order."""


class CompatibilityError(BergmanError):
    """A rule is not compatible with the chosen order."""

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class CompletionStuckError(BergmanError):
    """Completion produced a residual that cannot be oriented."""


class PreconditionError(BergmanError):
    """An operation was called on input outside its domain."""


class InternalConsistencyError(BergmanError):
    """An invariant that the relations are meant to preserve was broken."""


class ResourceError(BergmanError):
    """A configured size cap was exceeded."""


class UncertifiedError(BergmanError):
    """A basis was requested from a presentation that has not passed its checks."""

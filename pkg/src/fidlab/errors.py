"""Exception hierarchy shared across the package."""


class FidlabError(Exception):
    """Base class for all package-specific errors."""


class InputError(FidlabError, ValueError):
    """An argument violates a documented precondition."""


class ConfigError(InputError):
    """An experiment configuration is malformed or inconsistent."""


class NumericError(FidlabError, RuntimeError):
    """A numerical routine failed to converge or produced invalid values."""


class ResourceLimitError(FidlabError, RuntimeError):
    """A size guard was exceeded (operator would not fit in desk-scale memory)."""


class VerificationError(FidlabError, RuntimeError):
    """A verification run completed but one or more checks failed."""

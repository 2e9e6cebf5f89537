"""Exception hierarchy shared by all modules and mapped to CLI exit codes."""


class ParaInterpError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 1


class ValidationError(ParaInterpError, ValueError):
    """Invalid parameters, malformed input or violated preconditions."""

    exit_code = 2


class ResourceLimitError(ParaInterpError):
    """A configured size or work budget would be exceeded."""

    exit_code = 3


class VerificationError(ParaInterpError):
    """A numerical check produced a residual above its threshold."""

    exit_code = 1

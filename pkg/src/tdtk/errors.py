"""Exception types shared across the toolkit.

Every error raised by the public API derives from TdtkError so callers can
catch the whole family; the CLI maps subclasses to stable exit codes.
"""


class TdtkError(Exception):
    pass


class NonFinite(TdtkError):
    """Input contains NaN or infinity."""


class Singular(TdtkError):
    """A required SPD factorization does not exist at the given ridge."""


class DimensionMismatch(TdtkError):
    """Vector/matrix/scene dimensions do not agree."""


class DegenerateTarget(TdtkError):
    """Target coincides with the origin (unit-gain constraint unsatisfiable)."""


class PreconditionFailed(TdtkError):
    """An operation's stated precondition does not hold."""


class ZeroVariance(TdtkError):
    """Correlation requested between maps with no variance."""


class DegenerateMask(TdtkError):
    """Ground-truth mask lacks one of the two classes."""


class ConfigInvalid(TdtkError):
    """Synthesis or run configuration is unusable."""


class BadMagic(TdtkError):
    """Scene file header is malformed or has the wrong magic."""


class TruncatedPayload(TdtkError):
    """Scene file payload size disagrees with its header."""


class DimensionOverflow(TdtkError):
    """Scene file header declares non-positive or absurd dimensions."""


class ParseError(TdtkError):
    """A CSV row could not be parsed; message names the line."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line

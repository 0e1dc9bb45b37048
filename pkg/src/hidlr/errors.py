"""Exception types shared across the package."""


class HidlrError(Exception):
    """Base class for all package errors."""


class LengthMismatch(HidlrError):
    """Vector/layout dimensions disagree."""


class SingularSystem(HidlrError):
    """Least-squares design is numerically rank deficient."""


class SingularFit(HidlrError):
    """Probe magnitudes were too degenerate to fit a quadratic."""


class NonFiniteLoss(HidlrError):
    """A loss evaluation produced NaN or Inf."""


class DimensionMismatch(HidlrError):
    """Dataset shape does not match the model architecture."""


class UnknownStrategy(HidlrError):
    """Unrecognised parameter-grouping strategy."""


class NotPositiveDefinite(HidlrError):
    """Matrix required to be positive definite is not."""


class ParseError(HidlrError):
    """Malformed input file (config or CSV); message carries location."""


class MissingColumn(HidlrError):
    """CSV lacks a requested column."""


class ValidationError(HidlrError):
    """Config violates an invariant."""

"""Exception types raised across the package."""


class CDSMError(Exception):
    """Base class for package errors."""


class PlacementFailure(CDSMError):
    """Object placement gave up after too many consecutive rejections."""


class StreamTooShort(CDSMError):
    """A stream has fewer symbols than an operation needs."""


class ConvergenceFailure(CDSMError):
    """An eigensolve did not meet its residual bound."""


class DimensionError(CDSMError):
    """Requested embedding dimension exceeds the number of usable symbols."""


class TooFewSymbols(CDSMError):
    """A hierarchy level cannot be built from the given stream."""


class UnknownObservation(CDSMError):
    """A raw observation, or transition, cannot be mapped by the model."""


class DegenerateTopLevel(CDSMError):
    """The top level of a model does not have two active units."""


class StreamFormatError(CDSMError):
    """A stream or model file could not be parsed."""

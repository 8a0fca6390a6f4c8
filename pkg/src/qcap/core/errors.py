class QcapError(Exception):
    """Base class for all qcap errors."""


class DimensionMismatchError(QcapError, ValueError):
    pass


class InvalidStateError(QcapError, ValueError):
    """A matrix or vector is not a valid state (non-Hermitian, negative, wrong trace or norm, non-finite)."""


class InvalidIsometryError(QcapError, ValueError):
    pass


class ParameterRangeError(QcapError, ValueError):
    pass


class ArtifactError(QcapError):
    """An input file or channel spec could not be read or understood."""

"""Exception hierarchy.

Every error the library raises on purpose derives from CondetError, so
callers can catch one base class at an API boundary.
"""


class CondetError(Exception):
    """Base class for all condet errors."""


class DuplicateAddressError(CondetError):
    """Two entries in one signal vector carry the same address."""


class ZeroLevelError(CondetError):
    """A signal or band observation carries a level of zero or below."""


class LevelOutOfRangeError(CondetError):
    """A signal level exceeds the normalized maximum of 1."""


class OutOfBandError(CondetError):
    """A frequency or level falls outside the mapped lability band."""


class ZeroCyclesError(CondetError):
    """Membership was queried before any learning cycle was counted."""


class EmptyConceptError(CondetError):
    """Threshold recomputation was asked for a concept with no bands."""


class EmptyFieldError(CondetError):
    """Competition was invoked with no fired detectors."""


class NoFreeDetectorError(CondetError):
    """A capture was requested in a module with no free detector left."""


class AlreadyBoundError(CondetError):
    """A detector already coupled to one label was bound to another."""


class UnknownTeacherError(CondetError):
    """A teacher address does not belong to the label module."""


class PatternParseError(CondetError):
    """A pattern file is malformed; the message names file and pattern."""


class DimensionMismatchError(CondetError):
    """Pattern grids in one set disagree on shape, or a grid is ragged."""


class ConfigError(CondetError):
    """A configuration value is missing, unknown, or out of range."""


class CheckpointError(CondetError):
    """A checkpoint file cannot be read back into a network state."""

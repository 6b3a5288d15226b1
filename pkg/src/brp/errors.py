"""Exception hierarchy shared by every module."""

import numpy as np


class BRPError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(BRPError, ValueError):
    """Operand shapes are incompatible with the requested operation."""


class NonFiniteError(BRPError, ValueError):
    """A matrix contains NaN or Inf."""


class ConfigError(BRPError, ValueError):
    """A sketch or experiment configuration is invalid for its input."""


class HypothesisError(BRPError, ValueError):
    """Inputs violate the hypotheses under which a bound holds."""


class DegenerateSpectrumError(BRPError, ValueError):
    """A bound divides by a singular value that is zero."""


class SingularMatrixError(BRPError, np.linalg.LinAlgError):
    """A small matrix is too ill-conditioned to invert.

    ``condition`` carries the estimate (``inf`` for an exactly singular input).
    """

    def __init__(self, message, condition=float("inf")):
        super().__init__(message)
        self.condition = condition


class FormatError(BRPError, ValueError):
    """A file could not be parsed.  ``location`` names the line or byte offset."""

    def __init__(self, message, path=None, location=None):
        where = ""
        if path is not None:
            where = f"{path}"
            if location is not None:
                where += f":{location}"
            where += ": "
        super().__init__(where + message)
        self.path = path
        self.location = location

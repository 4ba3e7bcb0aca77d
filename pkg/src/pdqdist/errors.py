"""
Exception hierarchy shared by every pdqdist module.

All errors raised on purpose by the library derive from :class:`PdqError`.
The CLI turns them into a one-line JSON object on stderr.
"""

from typing import Any, Dict, Optional


class PdqError(Exception):
    """Base class for pdqdist errors."""

    def to_dict(self) -> Dict[str, Any]:
        return {"error": type(self).__name__, "message": str(self)}


class ParseError(PdqError, ValueError):
    """A diagram or cloud file could not be decoded."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)

    def to_dict(self) -> Dict[str, Any]:
        d = super().to_dict()
        if self.line is not None:
            d["line"] = self.line
        return d


class DiagramValidationError(PdqError, ValueError):
    """A point violates death >= birth or has a non-finite coordinate."""


class ParameterError(PdqError, ValueError):
    """A numeric parameter is outside its documented range."""


class CapacityError(PdqError):
    """A problem exceeds a configured size cap (qubits, states, cloud size, grid)."""


class InfeasibleAssignmentError(PdqError):
    """No assignment avoids the forbidden cells of a cost matrix."""


class DimensionMismatchError(PdqError):
    """A state vector does not match the graph it is applied with."""

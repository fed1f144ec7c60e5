"""Exception types shared across the package."""


class PlumestatError(Exception):
    """Base class for all package errors."""


class ParseError(PlumestatError):
    """Malformed input text; carries the offending row/token where known."""

    def __init__(self, message, row=None, token=None):
        super().__init__(message)
        self.row = row
        self.token = token


class ValidationFailed(PlumestatError):
    """Raised when error-severity diagnostics block an analysis."""

    def __init__(self, diagnostics):
        self.diagnostics = diagnostics
        errors = [d for d in diagnostics if d.severity == "error"]
        super().__init__(f"{len(errors)} validation error(s)")


class InsufficientDataError(PlumestatError):
    """Too few samples for the requested operation."""


class TriangulationError(PlumestatError):
    """Well layout does not admit a Delaunay triangulation."""


class RankDeficiencyError(PlumestatError):
    """Normal equations are singular (typically lambda = 0 on a rich basis)."""


class ExtrapolationError(PlumestatError):
    """Prediction requested outside the fitted basis range."""

    def __init__(self, message, points=None):
        super().__init__(message)
        self.points = points or []


class FitError(PlumestatError):
    """Model fitting failed for a reason other than rank deficiency."""

"""
Custom exceptions for metric-forest.

Every error carries a process exit code so the CLI can report failures
consistently: 1 for usage errors, 2 for bad input data, 3 for internal
invariant violations.
"""

from typing import Any, Dict, Optional

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


class MetricForestError(Exception):
    """Base exception for all library errors"""

    def __init__(
        self,
        message: str,
        exit_code: int = EXIT_INTERNAL,
        error_code: str = "INTERNAL_ERROR",
        details: Optional[Dict[str, Any]] = None,
    ):
        self.message = message
        self.exit_code = exit_code
        self.error_code = error_code
        self.details = details or {}
        super().__init__(self.message)


# Argument Errors
class InvalidArgumentError(MetricForestError):
    """An argument is outside its valid domain"""

    def __init__(
        self, message: str, field: Optional[str] = None, value: Optional[Any] = None
    ):
        details = {}
        if field:
            details["field"] = field
        if value is not None:
            details["invalid_value"] = str(value)

        super().__init__(
            message=message,
            exit_code=EXIT_USAGE,
            error_code="INVALID_ARGUMENT",
            details=details,
        )


class MissingArgumentError(InvalidArgumentError):
    """Required argument is missing"""

    def __init__(self, field: str):
        super().__init__(
            message=f"Required argument '{field}' is missing",
            field=field,
        )
        self.error_code = "MISSING_ARGUMENT"


class SizeLimitError(InvalidArgumentError):
    """Input is larger than a configured cap"""

    def __init__(self, what: str, size: int, limit: int):
        super().__init__(
            message=f"{what} size ({size}) exceeds the configured limit ({limit})",
        )
        self.error_code = "SIZE_LIMIT"
        self.details["size"] = size
        self.details["limit"] = limit


class EmptyStructureError(InvalidArgumentError):
    """Operation needs a non-empty structure"""

    def __init__(self, structure: str):
        super().__init__(message=f"{structure} is empty")
        self.error_code = "EMPTY_STRUCTURE"
        self.details["structure"] = structure


# State Errors
class InvalidStateError(MetricForestError):
    """Operation called on a structure in the wrong state"""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(
            message=message,
            exit_code=EXIT_INTERNAL,
            error_code="INVALID_STATE",
            details=details,
        )


class InvariantViolationError(MetricForestError):
    """An instrumented invariant check failed"""

    def __init__(self, invariant: str, message: str, details: Optional[Dict[str, Any]] = None):
        details = details or {}
        details["invariant"] = invariant
        super().__init__(
            message=f"{invariant}: {message}",
            exit_code=EXIT_INTERNAL,
            error_code="INVARIANT_VIOLATION",
            details=details,
        )


# Data Errors
class DataError(MetricForestError):
    """Input data cannot be used"""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(
            message=message,
            exit_code=EXIT_DATA,
            error_code="DATA_ERROR",
            details=details,
        )


class DataParseError(DataError):
    """File could not be parsed"""

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        details = {}
        if path:
            details["path"] = path
        if line is not None:
            details["line"] = line

        super().__init__(message=message, details=details)
        self.error_code = "PARSE_ERROR"


class MetricViolationError(DataError):
    """Distances do not form a metric"""

    def __init__(self, axiom: str, message: str, worst_violation: Optional[float] = None):
        details = {"axiom": axiom}
        if worst_violation is not None:
            details["worst_violation"] = worst_violation

        super().__init__(message=message, details=details)
        self.error_code = "METRIC_VIOLATION"


class DuplicatePointError(DataError):
    """Two distinct ids are at distance zero"""

    def __init__(self, point_id: int, duplicate_of: int):
        super().__init__(
            message=(
                f"Point {point_id} coincides with point {duplicate_of}; "
                "remove duplicates (--dedup) before building a cover tree"
            ),
            details={"point_id": point_id, "duplicate_of": duplicate_of},
        )
        self.error_code = "DUPLICATE_POINT"


class DisconnectedGraphError(DataError):
    """Graph has more than one connected component"""

    def __init__(self, components: int):
        super().__init__(
            message=f"Graph is disconnected ({components} components)",
            details={"components": components},
        )
        self.error_code = "DISCONNECTED_GRAPH"


class GenerationFailureError(DataError):
    """A rejection sampler ran out of attempts"""

    def __init__(self, generator: str, attempts: int):
        super().__init__(
            message=f"{generator} gave up after {attempts} attempts",
            details={"generator": generator, "attempts": attempts},
        )
        self.error_code = "GENERATION_FAILURE"

"""Error handling utilities for the smart_csg solver."""

from typing import Dict, Any, List, Optional


class CSGException(Exception):
    """Base exception for solver errors."""

    def __init__(self, message: str, component: Optional[str] = None, error_code: Optional[str] = None):
        """Initialize a new CSGException instance.

        Args:
            message: Error message
            component: Component where the error occurred (e.g. "cdp", "offline")
            error_code: Optional error code
        """
        self.message = message
        self.component = component
        self.error_code = error_code
        super().__init__(self.message)

    def to_dict(self) -> Dict[str, Any]:
        """Convert the exception to a dictionary.

        Returns:
            Dictionary representation of the exception
        """
        return {
            "message": self.message,
            "component": self.component,
            "error_code": self.error_code
        }


class InvalidArgumentException(CSGException, ValueError):
    """Raised when an operation receives an argument outside its domain."""

    def __init__(self, message: str, component: Optional[str] = None):
        super().__init__(message, component, "ARGUMENT_ERROR")


class ValidationException(CSGException):
    """Exception for validation errors."""

    def __init__(self, message: str, component: Optional[str] = None, validation_errors: Optional[List[str]] = None):
        """Initialize a new ValidationException instance.

        Args:
            message: Error message
            component: Component where the error occurred
            validation_errors: List of validation errors
        """
        super().__init__(message, component, "VALIDATION_ERROR")
        self.validation_errors = validation_errors or []

    def to_dict(self) -> Dict[str, Any]:
        result = super().to_dict()
        result["validation_errors"] = self.validation_errors
        return result


class PreconditionException(CSGException):
    """Raised when a solver refuses to run because optimality could not be guaranteed."""

    def __init__(self, message: str, component: Optional[str] = None):
        super().__init__(message, component, "PRECONDITION_ERROR")


class StateException(CSGException):
    """Raised when an object is used before it is ready."""

    def __init__(self, message: str, component: Optional[str] = None):
        super().__init__(message, component, "STATE_ERROR")


class InternalCorruptionException(CSGException):
    """Raised when shared tables are found in an impossible state."""

    def __init__(self, message: str, component: Optional[str] = None, coalition: Optional[int] = None):
        super().__init__(message, component, "CORRUPTION_ERROR")
        self.coalition = coalition

    def to_dict(self) -> Dict[str, Any]:
        result = super().to_dict()
        result["coalition"] = self.coalition
        return result


class RefusalException(CSGException):
    """Raised when a request is too large for the selected algorithm."""

    def __init__(self, message: str, component: Optional[str] = None):
        super().__init__(message, component, "REFUSED")


class TuningException(CSGException):
    """Base class for tuning file errors."""

    def __init__(self, message: str, path: Optional[str] = None, error_code: str = "TUNING_ERROR"):
        """Initialize a new TuningException instance.

        Args:
            message: Error message
            path: Tuning file involved, if any
            error_code: Specific error code
        """
        super().__init__(message, "offline", error_code)
        self.path = path

    def to_dict(self) -> Dict[str, Any]:
        result = super().to_dict()
        result["path"] = self.path
        return result


class TuningFileNotFoundException(TuningException):
    def __init__(self, message: str, path: Optional[str] = None):
        super().__init__(message, path, "TUNING_NOT_FOUND")


class MalformedTuningException(TuningException):
    def __init__(self, message: str, path: Optional[str] = None):
        super().__init__(message, path, "TUNING_MALFORMED")


class TuningMismatchException(TuningException):
    """Raised when a tuning file was produced for a different agent count."""

    def __init__(self, message: str, path: Optional[str] = None, expected_n: Optional[int] = None,
                 actual_n: Optional[int] = None):
        super().__init__(message, path, "TUNING_SIZE_MISMATCH")
        self.expected_n = expected_n
        self.actual_n = actual_n

    def to_dict(self) -> Dict[str, Any]:
        result = super().to_dict()
        result["expected_n"] = self.expected_n
        result["actual_n"] = self.actual_n
        return result


class ProblemFileException(CSGException):
    """Exception for unreadable or inconsistent problem files."""

    def __init__(self, message: str, path: Optional[str] = None):
        super().__init__(message, "formats", "PROBLEM_FILE_ERROR")
        self.path = path

    def to_dict(self) -> Dict[str, Any]:
        result = super().to_dict()
        result["path"] = self.path
        return result


def format_error_response(error: Exception, algorithm: Optional[str] = None, n: Optional[int] = None) -> Dict[str, Any]:
    """Format an error response.

    Args:
        error: The error that occurred
        algorithm: Algorithm that was running
        n: Agent count of the problem

    Returns:
        Formatted error response
    """
    if isinstance(error, CSGException):
        error_data = error.to_dict()
    else:
        error_data = {
            "message": str(error),
            "error_code": "GENERAL_ERROR"
        }

    return {
        "algorithm": algorithm,
        "n": n,
        "error": error_data,
        "status": "error"
    }

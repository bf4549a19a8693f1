"""
Error handling for Fiducial Splat

This module defines custom exceptions and error handling utilities
shared by the marker, partition, splat, renderer and harness modules.
"""

import logging
import os
from dataclasses import dataclass
from typing import Any, Dict, Iterable, Optional

logger = logging.getLogger(__name__)


@dataclass
class ErrorContext:
    """Context information for error reporting."""
    operation: str
    file_path: Optional[str] = None
    format: Optional[str] = None
    additional_info: Optional[Dict[str, Any]] = None


class FiducialSplatError(Exception):
    """Base exception class for all Fiducial Splat errors."""

    def __init__(self, message: str, context: Optional[ErrorContext] = None):
        self.message = message
        self.context = context
        super().__init__(self._format_message())

    def _format_message(self) -> str:
        """Format error message with context."""
        msg = self.message
        if self.context:
            msg += f"\nContext: {self.context.operation}"
            if self.context.file_path:
                msg += f" | File: {self.context.file_path}"
            if self.context.format:
                msg += f" | Format: {self.context.format}"
            if self.context.additional_info:
                details = ", ".join(
                    f"{key}={value}"
                    for key, value in sorted(self.context.additional_info.items())
                )
                msg += f" | {details}"
        return msg


class MarkerParseError(FiducialSplatError):
    """Raised when a marker or image file is malformed."""

    def __init__(
        self,
        message: str,
        context: Optional[ErrorContext] = None,
        line: Optional[int] = None,
        offset: Optional[int] = None,
    ):
        self.line = line
        self.offset = offset
        if line is not None:
            message = f"{message} (line {line}"
            message += f", offset {offset})" if offset is not None else ")"
        elif offset is not None:
            message = f"{message} (offset {offset})"
        super().__init__(message, context)


class DimensionError(FiducialSplatError):
    """Raised when array or grid dimensions do not agree."""
    pass


class ImageFormatError(FiducialSplatError):
    """Raised when channels and file format do not match."""
    pass


class ConfigurationError(FiducialSplatError):
    """Raised when there's a configuration error."""
    pass


class ValidationError(FiducialSplatError):
    """Raised when input validation fails."""
    pass


class PartitionConsistencyError(FiducialSplatError):
    """Raised when the rectangle partition violates one of its invariants."""
    pass


class SplatFileError(FiducialSplatError):
    """Raised when a splat file cannot be read back into a SplatSet."""
    pass


class PlySchemaError(SplatFileError):
    """Raised when a PLY file lacks properties of the splat schema."""

    def __init__(
        self,
        missing: Iterable[str],
        context: Optional[ErrorContext] = None,
    ):
        self.missing = sorted(missing)
        super().__init__(
            f"PLY schema mismatch, missing properties: {', '.join(self.missing)}",
            context,
        )


class ProjectionError(FiducialSplatError):
    """Raised when a marker point does not project into the image."""
    pass


def create_error_context(
    operation: str,
    file_path: Optional[str] = None,
    format: Optional[str] = None,
    **additional_info: Any,
) -> ErrorContext:
    """
    Create an ErrorContext object with the given parameters.

    Args:
        operation: The operation being performed
        file_path: Path to the file being processed
        format: File format being used
        **additional_info: Additional context information

    Returns:
        ErrorContext object
    """
    return ErrorContext(
        operation=operation,
        file_path=str(file_path) if file_path is not None else None,
        format=format,
        additional_info=additional_info if additional_info else None,
    )


def handle_error(
    error: Exception,
    context: Optional[ErrorContext] = None,
) -> FiducialSplatError:
    """
    Convert an arbitrary exception into a FiducialSplatError.

    Library errors pass through unchanged; OS errors and anything else are
    wrapped so callers only ever have to catch FiducialSplatError.

    Args:
        error: The exception that was raised
        context: Additional context information

    Returns:
        The error to raise
    """
    if isinstance(error, FiducialSplatError):
        return error

    if isinstance(error, FileNotFoundError):
        wrapped: FiducialSplatError = FiducialSplatError(
            f"File not found: {error.filename or error}", context
        )
    elif isinstance(error, PermissionError):
        wrapped = FiducialSplatError(f"Permission denied: {error}", context)
    elif isinstance(error, OSError):
        wrapped = FiducialSplatError(f"I/O failure: {error}", context)
    else:
        wrapped = FiducialSplatError(f"Unexpected error: {error}", context)

    logger.debug(
        "wrapped %s as %s (%s)",
        type(error).__name__,
        type(wrapped).__name__,
        context.operation if context else "-",
    )
    return wrapped


def validate_file_path(file_path: str, operation: str) -> None:
    """
    Validate a file path for marker and image operations.

    Args:
        file_path: Path to validate
        operation: Operation being performed

    Raises:
        ValidationError: If the file path is invalid
    """
    if not file_path or not str(file_path).strip():
        raise ValidationError(
            "File path cannot be empty",
            create_error_context(operation, file_path=file_path)
        )

    # For save operations, make sure the directory exists
    if operation.startswith(("save", "write", "export")):
        directory = os.path.dirname(str(file_path))
        if directory and not os.path.exists(directory):
            try:
                os.makedirs(directory, exist_ok=True)
            except OSError as e:
                raise ValidationError(
                    f"Cannot create directory: {e}",
                    create_error_context(operation, file_path=file_path)
                )


def validate_format(format: str, allowed_formats: Iterable[str], operation: str) -> None:
    """
    Validate a file format.

    Args:
        format: Format to validate
        allowed_formats: Allowed formats
        operation: Operation being performed

    Raises:
        ValidationError: If the format is invalid
    """
    allowed = list(allowed_formats)
    if format not in allowed:
        raise ValidationError(
            f"Invalid format: {format}. Allowed formats: {allowed}",
            create_error_context(operation, format=format)
        )

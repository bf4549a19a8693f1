"""
Fiducial Splat Utilities Module

Error types, configuration loading and logging setup.
"""

from .config import DEFAULT_CONFIG, default_levels, load_config, merge_config
from .error_handler import (
    ConfigurationError,
    DimensionError,
    ErrorContext,
    FiducialSplatError,
    ImageFormatError,
    MarkerParseError,
    PartitionConsistencyError,
    PlySchemaError,
    ProjectionError,
    SplatFileError,
    ValidationError,
    create_error_context,
    handle_error,
)
from .logging_setup import configure_logging

__all__ = [
    'FiducialSplatError',
    'MarkerParseError',
    'DimensionError',
    'ImageFormatError',
    'ConfigurationError',
    'ValidationError',
    'PartitionConsistencyError',
    'SplatFileError',
    'PlySchemaError',
    'ProjectionError',
    'ErrorContext',
    'create_error_context',
    'handle_error',
    'DEFAULT_CONFIG',
    'default_levels',
    'load_config',
    'merge_config',
    'configure_logging',
]

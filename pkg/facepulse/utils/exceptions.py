"""
Custom exceptions for facepulse.

This module provides custom exception classes for better error handling and reporting.
"""

from typing import Optional


class FacePulseError(Exception):
    """Base exception for all facepulse errors."""
    pass


class ConfigError(FacePulseError):
    """Raised when there's an issue with the configuration."""
    pass


class ValidationError(ConfigError):
    """Raised when configuration validation fails."""
    pass


class InvalidInputError(FacePulseError):
    """Raised when an operation receives arguments outside its preconditions."""
    pass


class InvalidBandError(InvalidInputError):
    """Raised when a frequency band does not fit below the Nyquist rate."""
    pass


class DegenerateFaceError(FacePulseError):
    """Raised when landmarks do not describe a usable face (e.g. all collinear)."""
    pass


class EmptyStackError(FacePulseError):
    """Raised when a frame sequence has no frame with valid landmarks."""
    pass


class UndefinedKfdError(FacePulseError):
    """Raised when the Katz fractal dimension is undefined (constant series)."""
    pass


class DegenerateTraceError(FacePulseError):
    """Raised when an RGB trace cannot be transformed (zero-mean row, rank deficiency)."""
    pass


class EmptySeriesError(FacePulseError):
    """Raised when a signal is too short to produce a single analysis window."""
    pass


class NoAlignmentError(FacePulseError):
    """Raised when two heart-rate series share too few valid windows to align."""
    pass


class InsufficientDataError(FacePulseError):
    """Raised when too few jointly valid windows remain to compute metrics."""
    pass


class DataError(FacePulseError):
    """Raised when input data on disk is missing or malformed."""
    pass


class FrameSourceError(DataError):
    """Raised when a frame directory or raw container cannot be read."""
    pass


class LandmarkFormatError(DataError):
    """Raised when a landmark CSV file is malformed."""
    pass


class ReferenceFormatError(DataError):
    """Raised when a reference signal file is malformed."""
    pass


class PipelineError(FacePulseError):
    """Raised when a pipeline stage fails; carries the stage name and position."""

    def __init__(self, stage: str, message: str, index: Optional[int] = None):
        self.stage = stage
        self.index = index
        where = f" at index {index}" if index is not None else ""
        super().__init__(f"[{stage}{where}] {message}")

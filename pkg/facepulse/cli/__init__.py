"""
Command-line interface package for facepulse.

This package provides the command-line interface for facepulse.
"""

from .main import main

__all__ = ["main"]

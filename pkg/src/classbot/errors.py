"""Shared exception base for the package."""

from __future__ import annotations


class ClassbotError(Exception):
    """Base class for every domain error raised by this package."""

"""Command-line interface package."""

from .main import main

__all__ = ["main"]

"""
Command-line interface for FilmCrew.
"""

from .commands import build_parser, main

__all__ = ["build_parser", "main"]

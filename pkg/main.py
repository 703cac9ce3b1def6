"""
Main entry point for the FilmCrew command-line tool.
"""

import sys

from src.cli import main

if __name__ == "__main__":
    sys.exit(main())

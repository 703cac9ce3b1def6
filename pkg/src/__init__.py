"""
FilmCrew
A multi-agent film production engine: turns a one-line story idea into a fully
annotated film script with positions, actions, movements and camera shots.
"""

__version__ = "1.0.0"
__author__ = "FilmCrew Team"
__description__ = "Multi-agent LLM orchestration engine for annotated film scripts"

"""
Test suite for FilmCrew.
"""

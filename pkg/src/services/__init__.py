"""
Services for the FilmCrew screenplay engine.
"""

from .environment import load_environment, check_integrity, environment_stats
from .script_codec import parse_script, parse_document, serialize_script, estimate_durations
from .validator import validate, apply_suggestions, derive_state_trace, has_errors
from .json_extract import extract_json
from .transcript import Transcript, load_records
from .provider import ChatProvider, LiveProvider, ReplayProvider, complete_json
from .collaboration import critique_correct_verify, debate_judge
from .crew import Crew, TemplateLibrary, render, filter_actor_feedback
from .storyboard import render_storyboard
from .run_store import RunStore
from .workflow import Production, open_run, make_provider

__all__ = [
    "load_environment",
    "check_integrity",
    "environment_stats",
    "parse_script",
    "parse_document",
    "serialize_script",
    "estimate_durations",
    "validate",
    "apply_suggestions",
    "derive_state_trace",
    "has_errors",
    "extract_json",
    "Transcript",
    "load_records",
    "ChatProvider",
    "LiveProvider",
    "ReplayProvider",
    "complete_json",
    "critique_correct_verify",
    "debate_judge",
    "Crew",
    "TemplateLibrary",
    "render",
    "filter_actor_feedback",
    "render_storyboard",
    "RunStore",
    "Production",
    "open_run",
    "make_provider",
]

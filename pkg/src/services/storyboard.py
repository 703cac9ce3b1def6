"""
Storyboard rendering: a human-readable shot list with a running time column.
"""

from typing import Dict, List, Tuple

from ..models import AnnotatedScript, LineEvent, LineTiming, MoveEvent

NO_SHOT = "(no shot)"


def _format_event(event, start: float) -> str:
    shot = event.shot or NO_SHOT
    if isinstance(event, MoveEvent):
        return f"[t={start:.1f}s] {shot} — {event.move.character} moves to {event.move.destination}"
    parts = [f"[t={start:.1f}s] {shot}", f'{event.speaker}: "{event.content}"']
    if event.actions:
        parts.append("; ".join(f"{a.character}: {a.action}" for a in event.actions))
    return " — ".join(parts)


def render_storyboard(script: AnnotatedScript, timings: List[LineTiming]) -> str:
    """One header per scene, then one line per event. Time runs across the whole film."""
    durations: Dict[Tuple[int, int], float] = {
        (t.scene_index, t.event_index): t.duration for t in timings
    }
    lines: List[str] = []
    elapsed = 0.0
    for scene_index, scene in enumerate(script.scenes):
        if lines:
            lines.append("")
        lines.append(f"Scene {scene_index + 1}: {scene.location} ({', '.join(scene.who)})")
        for event_index, event in enumerate(scene.events):
            lines.append(_format_event(event, elapsed))
            elapsed += durations.get((scene_index, event_index), 0.0)
    lines.append("")
    lines.append(f"Total running time: {elapsed:.1f}s")
    return "\n".join(lines) + "\n"


def count_lines(script: AnnotatedScript) -> int:
    return sum(1 for scene in script.scenes for event in scene.events if isinstance(event, LineEvent))

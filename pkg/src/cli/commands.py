"""
Command-line surface: produce, validate, render and env.

Exit codes: 0 success, 1 domain error, 2 input or parse error.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from dotenv import load_dotenv

from .. import __version__
from ..config import Settings, configure_logging, load_settings
from ..errors import FilmCrewError, ParseError
from ..models import AnnotatedScript, CollaborationMode, EnvironmentSpec
from ..services.crew import TemplateLibrary
from ..services.environment import environment_stats, load_environment
from ..services.script_codec import estimate_durations, parse_script
from ..services.storyboard import render_storyboard
from ..services.validator import has_errors, validate
from ..services.workflow import STORYBOARD_FILE, Production, make_provider, open_run

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_INPUT = 2


def _positive_float(text: str) -> float:
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="filmcrew",
        description="Turn a one-line story idea into an annotated film script.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="JSON settings file; command-line flags override it")
    parser.add_argument("--quiet", action="store_true", help="only warnings and errors")
    parser.add_argument("--json", action="store_true", help="machine-readable output on stdout")
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR")
    commands = parser.add_subparsers(dest="command", required=True)

    produce = commands.add_parser("produce", help="run the full production pipeline")
    produce.add_argument("--topic", help="one-line story idea")
    produce.add_argument("--replay", help="transcript fixture (directory or .jsonl) to serve responses from")
    produce.add_argument("--record", help="copy the run transcript here as a replay fixture")
    produce.add_argument("--run-dir", help="run directory (default: <runs_directory>/<run id>)")
    produce.add_argument("--resume", help="continue the run in this directory")
    produce.add_argument("--env", dest="environment_path", help="environment file")
    produce.add_argument("--templates", dest="template_directory", help="prompt template directory")
    produce.add_argument("--ccv-max", dest="ccv_max_rounds", type=int, help="critique loop cap")
    produce.add_argument("--debate-rounds", dest="debate_rounds", type=int, help="cinematographer debate rounds")
    produce.add_argument("--mode", dest="collaboration_mode", choices=[m.value for m in CollaborationMode])
    produce.add_argument("--strict-counts", action="store_true", default=None,
                         help="require the full catalog sizes in the environment")
    produce.add_argument("--compat-loop-guard", action="store_true", default=None,
                         help="run critique loops for one extra round")
    produce.add_argument("--model", dest="model_name", help="chat model name")
    produce.add_argument("--base-url", dest="base_url", help="OpenAI-compatible endpoint")
    produce.set_defaults(handler=cmd_produce)

    check = commands.add_parser("validate", help="check a script against the environment")
    check.add_argument("script", help="annotated script JSON")
    check.add_argument("--env", dest="environment_path", help="environment file")
    check.set_defaults(handler=cmd_validate)

    render = commands.add_parser("render", help="write a storyboard for a script")
    render.add_argument("script", help="annotated script JSON")
    render.add_argument("--env", dest="environment_path", help="environment file")
    render.add_argument("--rate", dest="words_per_second", type=_positive_float, help="spoken words per second")
    render.add_argument("--floor", dest="duration_floor", type=_positive_float, help="shortest line in seconds")
    render.add_argument("--output", help="storyboard path (default: next to the script)")
    render.set_defaults(handler=cmd_render)

    env = commands.add_parser("env", help="inspect an environment file")
    env.add_argument("action", choices=["list", "stats"])
    env.add_argument("path", nargs="?", help="environment file")
    env.set_defaults(handler=cmd_env)
    return parser


SETTING_FLAGS = (
    "environment_path", "template_directory", "ccv_max_rounds", "debate_rounds", "collaboration_mode",
    "strict_counts", "compat_loop_guard", "model_name", "base_url", "words_per_second", "duration_floor",
)


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    overrides = {name: getattr(args, name, None) for name in SETTING_FLAGS}
    overrides["log_level"] = args.log_level
    return overrides


def _error(exc: Exception) -> None:
    print(f"error: {exc}", file=sys.stderr)


def _emit(args: argparse.Namespace, payload: Any, text: str) -> None:
    if args.json:
        print(json.dumps(payload, ensure_ascii=False))
    elif not args.quiet and text:
        print(text)


def _load_script(path: str) -> AnnotatedScript:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(exc.strerror or "cannot read file", locus=path)
    try:
        return parse_script(text)
    except FilmCrewError as exc:
        raise exc.tag(file=path)


def _load_environment(settings: Settings, path: Optional[str] = None) -> EnvironmentSpec:
    return load_environment(path or settings.environment_path, strict_counts=settings.strict_counts)


# Commands

def cmd_produce(args: argparse.Namespace, settings: Settings) -> int:
    if not args.topic and not args.resume:
        _error("produce needs --topic or --resume")
        return EXIT_INPUT

    try:
        env = _load_environment(settings)
        library = TemplateLibrary.load(settings.template_directory)
        store, state, transcript = open_run(settings, args.topic, args.run_dir, args.resume)
        provider = make_provider(settings, transcript, args.replay)
        production = Production(settings, env, library, provider, store, state)
    except FilmCrewError as exc:
        _error(exc)
        return exc.exit_code

    try:
        bundle = production.run()
    except FilmCrewError as exc:
        stage = exc.context.get("stage", "setup")
        print(f"stage {stage} failed: {exc}", file=sys.stderr)
        print(f"partial artifacts kept in {store.run_dir}", file=sys.stderr)
        return EXIT_DOMAIN
    finally:
        if args.record:
            saved = transcript.save(args.record)
            logger.info(f"Transcript recorded to {saved}")

    _emit(args, {
        "run_dir": str(store.run_dir),
        "run_id": state.run_id,
        "stage": state.stage.value,
        "calls": state.call_count,
        "validator": bundle.manifest.get("validator", {}),
    }, str(store.run_dir))
    return EXIT_OK


def cmd_validate(args: argparse.Namespace, settings: Settings) -> int:
    try:
        env = _load_environment(settings)
        script = _load_script(args.script)
    except FilmCrewError as exc:
        _error(exc)
        return exc.exit_code

    diagnostics = validate(script, env, settings.static_repeat_limit)
    if args.json:
        for diagnostic in diagnostics:
            print(json.dumps(diagnostic.to_record(), ensure_ascii=False))
    elif not args.quiet:
        for d in diagnostics:
            hint = f" (suggestion: {d.suggestion})" if d.suggestion else ""
            print(f"{d.severity.value} {d.rule.value} {d.locus}: {d.message}{hint}")
    return EXIT_DOMAIN if has_errors(diagnostics) else EXIT_OK


def cmd_render(args: argparse.Namespace, settings: Settings) -> int:
    try:
        env = _load_environment(settings)
        script = _load_script(args.script)
    except FilmCrewError as exc:
        _error(exc)
        return exc.exit_code

    blocking = [d for d in validate(script, env, settings.static_repeat_limit) if d.is_error]
    if blocking:
        for d in blocking:
            print(f"{d.severity.value} {d.rule.value} {d.locus}: {d.message}", file=sys.stderr)
        return EXIT_DOMAIN

    timings = estimate_durations(script, settings.words_per_second, settings.duration_floor, settings.move_duration)
    storyboard = render_storyboard(script, timings)
    output = Path(args.output) if args.output else Path(args.script).with_name(STORYBOARD_FILE)
    output.parent.mkdir(parents=True, exist_ok=True)
    output.write_text(storyboard, encoding="utf-8")
    _emit(args, {
        "storyboard": str(output),
        "events": len(timings),
        "running_time": round(sum(t.duration for t in timings), 2),
    }, str(output))
    return EXIT_OK


def _describe_environment(env: EnvironmentSpec) -> List[str]:
    lines = ["Locations:"]
    for location in env.locations:
        lines.append(f"  {location.name} (capacity {location.capacity})")
        for position in location.positions:
            seat = "sittable" if position.sittable else "standing only"
            lines.append(f"    {position.id}: {position.description} [{seat}]")
    lines.append("Actions:")
    for action in env.actions:
        lines.append(f"  {action.canonical_name} [{action.required_state.value}]")
    lines.append("Shots:")
    for shot in env.shots:
        lines.append(f"  {shot.canonical_name} ({shot.kind.value})")
    return lines


def cmd_env(args: argparse.Namespace, settings: Settings) -> int:
    try:
        env = _load_environment(settings, args.path)
    except FilmCrewError as exc:
        _error(exc)
        return EXIT_INPUT

    if args.action == "stats":
        stats = environment_stats(env)
        lines = [stats.summary()] + [f"  {name}: capacity {capacity}" for name, capacity in stats.capacities.items()]
        _emit(args, stats.model_dump(), "\n".join(lines))
    else:
        _emit(args, env.model_dump(mode="json"), "\n".join(_describe_environment(env)))
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    # LiveProvider reads its API key from os.environ.
    load_dotenv()
    try:
        settings = load_settings(args.config, overrides=_overrides(args))
    except FilmCrewError as exc:
        _error(exc)
        return exc.exit_code
    configure_logging(settings, quiet=args.quiet)
    return args.handler(args, settings)

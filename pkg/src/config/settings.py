"""
Application settings and configuration.
"""

import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, Optional, Union

from pydantic import ValidationError, field_validator
from pydantic_settings import BaseSettings

from ..errors import ParseError
from ..models.base import CollaborationMode, Role
from ..models.chat import ProviderConfig
from ..models.run import CliConfig


class Settings(BaseSettings):
    """Application settings."""

    app_name: str = "FilmCrew"
    app_version: str = "1.0.0"

    # Data locations
    environment_path: str = "environment/full.json"
    template_directory: str = "prompts"
    runs_directory: str = "runs"

    # Chat-completion provider
    base_url: Optional[str] = None
    model_name: str = "gpt-4o-2024-05-13"
    temperature: float = 0.2
    role_temperatures: Dict[str, float] = {}
    max_retries: int = 3
    request_timeout: float = 60.0
    backoff_seconds: float = 1.0
    api_key_env_var: str = "FILMAGENT_API_KEY"

    # Collaboration
    ccv_max_rounds: int = 3
    debate_rounds: int = 2
    json_attempts: int = 3
    compat_loop_guard: bool = False
    collaboration_mode: CollaborationMode = CollaborationMode.GROUP
    parallel_agents: bool = True

    # Environment and validator
    strict_counts: bool = False
    static_repeat_limit: int = 3

    # Timing estimator
    words_per_second: float = 2.5
    duration_floor: float = 1.5
    move_duration: float = 3.0

    # Logging Configuration
    log_level: str = "INFO"
    log_format: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

    @field_validator("role_temperatures", mode="before")
    @classmethod
    def parse_role_temperatures(cls, v: Union[str, Dict[str, float], None]) -> Dict[str, float]:
        """Accept "director=0.3,actor=0.7" as well as a JSON object."""
        if v is None or v == "":
            return {}
        if isinstance(v, str):
            if v.strip().startswith("{"):
                return json.loads(v)
            pairs = [item.split("=", 1) for item in v.split(",") if item.strip()]
            return {key.strip(): float(value) for key, value in pairs}
        return v

    @field_validator("role_temperatures")
    @classmethod
    def known_roles(cls, v: Dict[str, float]) -> Dict[str, float]:
        roles = {role.value for role in Role}
        unknown = sorted(set(v) - roles)
        if unknown:
            raise ValueError(f"unknown roles in role_temperatures: {', '.join(unknown)}")
        return v

    @field_validator("log_level")
    @classmethod
    def upper_level(cls, v: str) -> str:
        return v.upper()

    @field_validator("ccv_max_rounds", "json_attempts", "static_repeat_limit")
    @classmethod
    def at_least_one(cls, v: int) -> int:
        if v < 1:
            raise ValueError("must be at least 1")
        return v

    @field_validator("debate_rounds", "max_retries")
    @classmethod
    def not_negative(cls, v: int) -> int:
        if v < 0:
            raise ValueError("must not be negative")
        return v

    def provider_config(self, role: Optional[Role] = None) -> ProviderConfig:
        temperature = self.temperature
        if role is not None:
            temperature = self.role_temperatures.get(role.value, temperature)
        return ProviderConfig(
            base_url=self.base_url or None,
            model_name=self.model_name,
            temperature=temperature,
            max_retries=self.max_retries,
            timeout=self.request_timeout,
            backoff_seconds=self.backoff_seconds,
            api_key_env_var=self.api_key_env_var,
        )

    def cli_config(self) -> CliConfig:
        return CliConfig(
            environment_path=self.environment_path,
            template_directory=self.template_directory,
            provider=self.provider_config(),
            runs_directory=self.runs_directory,
            ccv_max=self.ccv_max_rounds,
            debate_rounds=self.debate_rounds,
            strict_counts=self.strict_counts,
            compat_loop_guard=self.compat_loop_guard,
            mode=self.collaboration_mode,
        )

    class Config:
        env_file = ".env"
        env_file_encoding = "utf-8"
        env_prefix = "FILMAGENT_"
        extra = "ignore"  # Ignore extra environment variables


def load_settings(config_file: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None) -> Settings:
    """Build settings from defaults, .env, an optional JSON config file and CLI overrides.

    Later sources win: CLI overrides > config file > environment > defaults.
    """
    values: Dict[str, Any] = {}
    if config_file:
        path = Path(config_file)
        try:
            values = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ParseError("config file not found", locus=str(path))
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, locus=f"{path}:{exc.lineno}:{exc.colno}")
        if not isinstance(values, dict):
            raise ParseError("config file must hold a JSON object", locus=str(path))
    values.update({key: value for key, value in (overrides or {}).items() if value is not None})
    try:
        return Settings(**values)
    except ValidationError as exc:
        first = exc.errors()[0]
        locus = ".".join(str(part) for part in first["loc"])
        raise ParseError(first["msg"], locus=locus or "settings")


def configure_logging(settings: Settings, quiet: bool = False) -> None:
    """Configure root logging once per process. Logs go to stderr so stdout stays parseable."""
    level = logging.WARNING if quiet else getattr(logging, settings.log_level, logging.INFO)
    logging.basicConfig(level=level, format=settings.log_format, stream=sys.stderr, force=True)

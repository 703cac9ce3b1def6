"""
Crew service: prompt template library, rendering and role-agent invocation.
"""

import json
import logging
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Mapping, Optional, Set, Tuple, Union

from jsonschema import Draft202012Validator
from jsonschema.exceptions import SchemaError as JsonSchemaError
from langchain_core.prompts import PromptTemplate as TextTemplate
from pydantic import ValidationError
from pydantic_core import to_jsonable_python

from ..errors import FilmCrewError, IntegrityError, MissingVariable, ParseError
from ..models import AnnotatedScript, ChatMessage, MessageRole, PromptTemplate, RoleAgent
from .provider import ChatProvider, complete_json

logger = logging.getLogger(__name__)

TEMPLATE_PREFIX = "prompt:"

SHOT_ANNOTATION_REQUIREMENTS = "\n".join([
    "   - Each scene should not have too many close-up shots and medium shots.",
    "   - Each shot used must meet its usage conditions.",
    "   - For the dialogue-starting scene, you should choose between [Truck Shot, Long Shot] to set the context.",
    "   - If you want to use Zoom Shot, you must ensure the preceding shot is a Long Shot.",
    "   - If you want to use Pan Shot during dialogue, it should be used multiple times in a row.",
])


def template_placeholders(body: str) -> Set[str]:
    return set(TextTemplate.from_template(body).input_variables)


class TemplateLibrary:
    """Prompt templates loaded from ``<name>.txt`` bodies and ``<name>.json`` descriptors."""

    def __init__(self, templates: Iterable[PromptTemplate]):
        self._templates: Dict[str, PromptTemplate] = {t.id: t for t in templates}
        self._validators: Dict[str, Draft202012Validator] = {
            t.id: Draft202012Validator(t.output_schema) for t in self._templates.values()
        }

    @classmethod
    def load(cls, directory: Union[str, Path]) -> "TemplateLibrary":
        directory = Path(directory)
        if not directory.is_dir():
            raise ParseError("template directory not found", locus=str(directory))

        templates = []
        for descriptor_path in sorted(directory.glob("*.json")):
            body_path = descriptor_path.with_suffix(".txt")
            try:
                descriptor = json.loads(descriptor_path.read_text(encoding="utf-8"))
            except json.JSONDecodeError as exc:
                raise ParseError(exc.msg, locus=f"{descriptor_path}:{exc.lineno}:{exc.colno}")
            if not body_path.exists():
                raise IntegrityError("template body exists", f"no body file for {descriptor_path.name}")
            body = body_path.read_text(encoding="utf-8")

            try:
                template = PromptTemplate(
                    id=descriptor.get("id", TEMPLATE_PREFIX + descriptor_path.stem),
                    body=body,
                    required_vars=tuple(descriptor.get("required_vars", ())),
                    role=descriptor.get("role"),
                    stage=descriptor.get("stage", ""),
                    purpose=descriptor.get("purpose", ""),
                    output_schema=descriptor.get("schema", {}),
                )
            except ValidationError as exc:
                first = exc.errors()[0]
                raise ParseError(first["msg"], locus=f"{descriptor_path}:{'.'.join(map(str, first['loc']))}")

            declared = set(template.required_vars)
            found = template_placeholders(body)
            if declared != found:
                raise IntegrityError(
                    "placeholders match required_vars",
                    f"{template.id}: body uses {sorted(found)}, descriptor declares {sorted(declared)}",
                )
            try:
                Draft202012Validator.check_schema(template.output_schema)
            except JsonSchemaError as exc:
                raise IntegrityError("output schema is valid JSON Schema", f"{template.id}: {exc.message}")
            templates.append(template)

        logger.info(f"Loaded {len(templates)} prompt templates from {directory}")
        return cls(templates)

    def get(self, template_id: str) -> PromptTemplate:
        key = template_id if template_id.startswith(TEMPLATE_PREFIX) else TEMPLATE_PREFIX + template_id
        try:
            return self._templates[key]
        except KeyError:
            raise IntegrityError("template exists", f"unknown template '{template_id}'")

    def schema_problems(self, template: PromptTemplate, document: Any) -> List[str]:
        validator = self._validators[template.id]
        problems = []
        for error in sorted(validator.iter_errors(document), key=lambda e: str(list(e.absolute_path))):
            path = "/".join(str(part) for part in error.absolute_path) or "$"
            problems.append(f"{path}: {error.message}")
        return problems

    def ids(self) -> List[str]:
        return sorted(self._templates)

    def __contains__(self, template_id: str) -> bool:
        return template_id in self._templates or TEMPLATE_PREFIX + template_id in self._templates

    def __len__(self) -> int:
        return len(self._templates)


def _as_text(value: Any) -> str:
    if isinstance(value, str):
        return value
    document = to_jsonable_python(value, by_alias=True, exclude_none=True)
    return json.dumps(document, indent=4, ensure_ascii=False)


def render(template: PromptTemplate, variables: Mapping[str, Any]) -> str:
    """Substitute every placeholder. Non-text values are pretty-printed as JSON."""
    for name in template.required_vars:
        if name not in variables:
            raise MissingVariable(name, template=template.id)
    values = {name: _as_text(variables[name]) for name in template.required_vars}
    return TextTemplate.from_template(template.body).format(**values)


class Crew:
    """Invokes role agents: render a template, call the provider, check the reply."""

    def __init__(self, provider: ChatProvider, library: TemplateLibrary, json_attempts: int = 3):
        self.provider = provider
        self.library = library
        self.json_attempts = json_attempts

    def invoke(
        self,
        agent: RoleAgent,
        template_id: str,
        variables: Mapping[str, Any],
        schema_check: Optional[Callable[[Any], List[str]]] = None,
        note: Optional[str] = None,
    ) -> Any:
        template = self.library.get(template_id)
        try:
            prompt = render(template, variables)
            if note:
                prompt = f"{prompt}\n\n### Note:\n{note}"

            def check(document: Any) -> List[str]:
                problems = self.library.schema_problems(template, document)
                if not problems and schema_check is not None:
                    problems = list(schema_check(document))
                return problems

            logger.debug(f"{agent.tag} <- {template.id}")
            return complete_json(
                self.provider,
                [ChatMessage(role=MessageRole.USER, content=prompt)],
                agent.provider_config,
                schema_check=check,
                attempts=self.json_attempts,
                agent_tag=agent.tag,
            )
        except FilmCrewError as exc:
            raise exc.tag(role=agent.role.value, template=template.id)


def _normalized(text: str) -> str:
    return " ".join(str(text).split()).casefold()


def filter_actor_feedback(
    entries: List[Dict[str, Any]], character: str, script: AnnotatedScript
) -> Tuple[List[Dict[str, Any]], List[Dict[str, Any]]]:
    """Split an actor's feedback into (kept, dropped): actors may only comment on their own lines."""
    own_lines = {
        _normalized(line.content)
        for scene in script.scenes
        for line in scene.lines()
        if line.speaker == character
    }
    kept, dropped = [], []
    for entry in entries:
        if entry.get("speaker") == character and _normalized(entry.get("content", "")) in own_lines:
            kept.append(entry)
        else:
            dropped.append(entry)
    if dropped:
        logger.warning(f"Dropped {len(dropped)} feedback entr(y/ies) from {character} on lines that are not theirs")
    return kept, dropped

"""Prompt templates: one YAML file per template, editable while running.

Files live in a directory (the packaged defaults unless configured
otherwise) and are re-read whenever their mtime changes, so operators can
tune prompt wording without restarting the service. Placeholder coverage
is checked at load time; a template that drifts from the set the engine
substitutes is a configuration error, not a runtime surprise.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import yaml

from ..errors import ConfigError

# Placeholders each template must contain, exactly.
REQUIRED_PLACEHOLDERS: dict[str, frozenset[str]] = {
    "system": frozenset(),
    "suggest_dimensions": frozenset({"intent", "count"}),
    "generate_ideas": frozenset({"intent", "related_works"}),
    "evaluate": frozenset({"intent", "ideas", "dimensions", "corrections"}),
    "modify": frozenset({"idea", "modifications", "intent"}),
    "merge": frozenset({"idea_a", "idea_b"}),
}

TEMPLATE_NAMES: tuple[str, ...] = tuple(sorted(REQUIRED_PLACEHOLDERS))

_PLACEHOLDER_RE = re.compile(r"\{([a-z][a-z0-9_]*)\}")


def default_prompt_dir() -> Path:
    return Path(__file__).resolve().parent.parent / "prompts"


@dataclass(frozen=True)
class PromptTemplate:
    name: str
    body: str
    description: str = ""

    def placeholders(self) -> frozenset[str]:
        return frozenset(_PLACEHOLDER_RE.findall(self.body))

    def render(self, **values: object) -> str:
        def substitute(match: re.Match) -> str:
            key = match.group(1)
            if key not in values:
                raise ConfigError(
                    f"template {self.name!r} needs a value for {{{key}}}"
                )
            return str(values[key])

        return _PLACEHOLDER_RE.sub(substitute, self.body)


def _load_file(path: Path, expected_name: str) -> PromptTemplate:
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read template {path}: {exc}") from exc
    try:
        doc = yaml.safe_load(raw)
    except yaml.YAMLError as exc:
        raise ConfigError(f"template {path} is not valid YAML: {exc}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("body"), str):
        raise ConfigError(f"template {path} must be a mapping with a 'body' string")
    name = doc.get("name", expected_name)
    if name != expected_name:
        raise ConfigError(
            f"template file {path.name} declares name {name!r}; expected "
            f"{expected_name!r} (file names equal template names)"
        )
    template = PromptTemplate(
        name=expected_name,
        body=doc["body"],
        description=str(doc.get("description", "")),
    )
    required = REQUIRED_PLACEHOLDERS[expected_name]
    found = template.placeholders()
    if found != required:
        missing = sorted(required - found)
        extra = sorted(found - required)
        raise ConfigError(
            f"template {expected_name!r} placeholder mismatch: "
            f"missing={missing} unexpected={extra}"
        )
    return template


class TemplateStore:
    """Loads and caches templates, reloading files whose mtime moved."""

    def __init__(self, directory: str | Path | None = None):
        self.directory = Path(directory) if directory else default_prompt_dir()
        self._cache: dict[str, tuple[float, PromptTemplate]] = {}
        self.validate()

    def _path(self, name: str) -> Path:
        return self.directory / f"{name}.yaml"

    def get(self, name: str) -> PromptTemplate:
        if name not in REQUIRED_PLACEHOLDERS:
            raise ConfigError(f"unknown template {name!r}")
        path = self._path(name)
        try:
            mtime = path.stat().st_mtime
        except OSError as exc:
            raise ConfigError(f"template file missing: {path}") from exc
        cached = self._cache.get(name)
        if cached is not None and cached[0] == mtime:
            return cached[1]
        template = _load_file(path, name)
        self._cache[name] = (mtime, template)
        return template

    def validate(self) -> None:
        """Load every template once; called at startup so bad edits fail fast."""
        for name in TEMPLATE_NAMES:
            self.get(name)

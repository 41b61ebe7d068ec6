"""YAML application configuration.

Every section is optional; omitted values fall back to the defaults below,
so an empty file (or no file at all) yields a runnable stub-provider setup.
Unknown keys are rejected: a typo in a config file should fail loudly at
startup, not silently leave a default in place.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from ..errors import ConfigError
from ..geometry import GeometryConfig


@dataclass
class ServerConfig:
    port: int = 8000


@dataclass
class ProviderConfig:
    name: str = "stub"
    base_url: str = ""
    model: str = ""
    api_key_env: str = ""
    timeout: float = 60.0


@dataclass
class PersistenceConfig:
    dir: Path = Path("data")
    snapshot_interval: int = 20


@dataclass
class AppConfig:
    server: ServerConfig = field(default_factory=ServerConfig)
    provider: ProviderConfig = field(default_factory=ProviderConfig)
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    persistence: PersistenceConfig = field(default_factory=PersistenceConfig)
    prompts_dir: Path | None = None

    def api_key(self) -> str:
        if not self.provider.api_key_env:
            return ""
        return os.environ.get(self.provider.api_key_env, "")


def _section(doc: dict, key: str) -> dict:
    value = doc.get(key, {})
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(f"config section {key!r} must be a mapping")
    return value


def _reject_unknown(section: dict, known: set[str], where: str) -> None:
    extra = set(section) - known
    if extra:
        raise ConfigError(f"unknown config key(s) in {where}: {sorted(extra)}")


def _num(section: dict, key: str, default: float, where: str) -> float:
    value = section.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}.{key} must be a number")
    return float(value)


def _intval(section: dict, key: str, default: int, where: str) -> int:
    value = section.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where}.{key} must be an integer")
    return value


def _strval(section: dict, key: str, default: str, where: str) -> str:
    value = section.get(key, default)
    if not isinstance(value, str):
        raise ConfigError(f"{where}.{key} must be a string")
    return value


def parse_config(doc: Any) -> AppConfig:
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a mapping")
    _reject_unknown(
        doc, {"server", "provider", "geometry", "persistence", "prompts"}, "config"
    )

    server_doc = _section(doc, "server")
    _reject_unknown(server_doc, {"port"}, "server")
    server = ServerConfig(port=_intval(server_doc, "port", 8000, "server"))
    if not 1 <= server.port <= 65535:
        raise ConfigError(f"server.port {server.port} outside [1, 65535]")

    provider_doc = _section(doc, "provider")
    _reject_unknown(
        provider_doc, {"name", "base_url", "model", "api_key_env", "timeout"}, "provider"
    )
    provider = ProviderConfig(
        name=_strval(provider_doc, "name", "stub", "provider"),
        base_url=_strval(provider_doc, "base_url", "", "provider"),
        model=_strval(provider_doc, "model", "", "provider"),
        api_key_env=_strval(provider_doc, "api_key_env", "", "provider"),
        timeout=_num(provider_doc, "timeout", 60.0, "provider"),
    )
    if provider.name not in ("stub", "live"):
        raise ConfigError(f"provider.name must be 'stub' or 'live', got {provider.name!r}")
    if provider.timeout <= 0:
        raise ConfigError("provider.timeout must be positive")

    geometry_doc = _section(doc, "geometry")
    _reject_unknown(
        geometry_doc,
        {"merge_threshold", "node_radius_min", "node_radius_max"},
        "geometry",
    )
    geometry = GeometryConfig(
        merge_threshold=_num(geometry_doc, "merge_threshold", 0.15, "geometry"),
        node_radius_min=_num(geometry_doc, "node_radius_min", 0.5, "geometry"),
        node_radius_max=_num(geometry_doc, "node_radius_max", 1.5, "geometry"),
    )
    if geometry.merge_threshold < 0:
        raise ConfigError("geometry.merge_threshold must be non-negative")
    if geometry.node_radius_min > geometry.node_radius_max:
        raise ConfigError("geometry.node_radius_min exceeds node_radius_max")

    persistence_doc = _section(doc, "persistence")
    _reject_unknown(persistence_doc, {"dir", "snapshot_interval"}, "persistence")
    persistence = PersistenceConfig(
        dir=Path(_strval(persistence_doc, "dir", "data", "persistence")),
        snapshot_interval=_intval(persistence_doc, "snapshot_interval", 20, "persistence"),
    )
    if persistence.snapshot_interval < 1:
        raise ConfigError("persistence.snapshot_interval must be >= 1")

    prompts_doc = _section(doc, "prompts")
    _reject_unknown(prompts_doc, {"dir"}, "prompts")
    prompts_dir = prompts_doc.get("dir")
    if prompts_dir is not None and not isinstance(prompts_dir, str):
        raise ConfigError("prompts.dir must be a string")

    return AppConfig(
        server=server,
        provider=provider,
        geometry=geometry,
        persistence=persistence,
        prompts_dir=Path(prompts_dir) if prompts_dir else None,
    )


def load_config(path: str | Path | None = None) -> AppConfig:
    """Load configuration from a YAML file, or defaults when path is None."""
    if path is None:
        return parse_config({})
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config file {path} is not valid YAML: {exc}") from exc
    return parse_config(doc)

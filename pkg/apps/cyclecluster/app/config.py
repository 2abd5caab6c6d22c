# BSD 3-Clause License
#
# Copyright (c) 2025, Infrastructure Architects, LLC
# All rights reserved.

"""Application configuration and settings"""

import hashlib
import logging
import os
from pathlib import Path
from typing import Any

import orjson
import pydantic
import yaml

from models import PipelineConfig

from .core.errors import ConfigError

logger = logging.getLogger(__name__)


class Settings:
    """Process settings loaded from environment variables"""

    log_level: str = os.getenv("LOG_LEVEL", "INFO")

    # Process-pool size for k-means restarts and gap bootstraps (1 = in-process)
    workers: int = int(os.getenv("CYCLECLUSTER_WORKERS", "1"))

    # OpenTelemetry
    otel_service_name: str = os.getenv("OTEL_SERVICE_NAME", "cyclecluster")
    otel_sdk_disabled: bool = os.getenv("OTEL_SDK_DISABLED", "false").lower() in ("true", "1", "yes")

    # Bundled configuration shipped with the repository
    default_config: str = os.getenv(
        "CYCLECLUSTER_CONFIG", str(Path(__file__).resolve().parents[3] / "config" / "cyclecluster.yaml")
    )


settings = Settings()


def _resolve(base: Path, value: str | None) -> str | None:
    if value is None:
        return None
    path = Path(value)
    return str(path if path.is_absolute() else (base / path))


def _expand_trips(base: Path, patterns: list[str] | str) -> list[str]:
    """Resolve trip paths; entries containing glob characters expand to sorted matches"""
    if isinstance(patterns, str):
        patterns = [patterns]
    paths: list[str] = []
    for pattern in patterns:
        resolved = _resolve(base, pattern)
        if not any(ch in pattern for ch in "*?["):
            paths.append(resolved)
            continue
        anchor = Path(resolved)
        matches = sorted(str(p) for p in anchor.parent.glob(anchor.name))
        if not matches:
            raise ConfigError(f"trip pattern '{pattern}' matched no files")
        paths.extend(matches)
    return paths


def load_pipeline_config(path: str | Path, overrides: dict[str, Any] | None = None) -> PipelineConfig:
    """Load a YAML pipeline config, apply CLI overrides and resolve relative paths.

    Relative paths inside the file are resolved against the file's directory.
    Overrides are applied on top of the file values before validation.
    """
    config_path = Path(path)
    if not config_path.is_file():
        raise ConfigError(f"config file not found: {config_path}")

    try:
        raw = yaml.safe_load(config_path.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as e:
        raise ConfigError(f"invalid YAML in {config_path}: {e}") from e
    if not isinstance(raw, dict):
        raise ConfigError(f"{config_path}: top level must be a mapping")

    base = config_path.resolve().parent
    raw["trips"] = _expand_trips(base, raw.get("trips", []))
    for key in ("weather", "calendar", "out"):
        if raw.get(key) is not None:
            raw[key] = _resolve(base, raw[key])

    # Flag overrides win and are taken relative to the working directory
    for key, value in (overrides or {}).items():
        if value is not None:
            raw[key] = value

    try:
        config = PipelineConfig(**raw)
    except pydantic.ValidationError as e:
        raise ConfigError(f"invalid pipeline config {config_path}: {e}") from e

    logger.info(f"Loaded pipeline config {config_path} (digest {config_digest(config)[:12]})")
    return config


def config_digest(config: PipelineConfig) -> str:
    """SHA-256 of the canonical JSON form of the effective config.

    The output directory is left out so the same inputs written to two
    directories carry the same digest.
    """
    canonical = orjson.dumps(config.model_dump(mode="json", exclude={"out"}), option=orjson.OPT_SORT_KEYS)
    return hashlib.sha256(canonical).hexdigest()

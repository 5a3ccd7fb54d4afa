"""YAML run configuration. Command-line flags take precedence over file values.

Example::

    backend:
      backend_id: openai
      model_name: gpt-3.5-turbo-1106
      seed: 42
      endpoint: https://api.openai.com/v1/chat/completions
    run:
      cache: transcripts.jsonl
      workers: 8
      policies: [union, strict]
      schemes: [cia, inference_llm_score, llm_score, token_f1]
"""

from __future__ import annotations

from dataclasses import fields
from pathlib import Path
from typing import Any, Optional

import yaml

from entail_eval.errors import ConfigError
from entail_eval.model import BackendConfig

BACKEND_KEYS = {f.name for f in fields(BackendConfig)}
RUN_KEYS = {
    "dataset",
    "format",
    "field_map",
    "gold_separator",
    "cache",
    "replay_only",
    "workers",
    "policies",
    "schemes",
    "population",
    "explain_all_ranks",
    "max_failure_rate",
    "max_invalid_fraction",
    "exclude_systems",
    "seeds",
    "weights",
}


def load_config(path: Optional[str | Path]) -> dict[str, dict[str, Any]]:
    """Read a config file into ``{"backend": {...}, "run": {...}}``."""
    if path is None:
        return {"backend": {}, "run": {}}
    try:
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a mapping")
    unknown = set(data) - {"backend", "run"}
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    backend = data.get("backend") or {}
    run = data.get("run") or {}
    bad = (set(backend) - BACKEND_KEYS) | (set(run) - RUN_KEYS)
    if bad:
        raise ConfigError(f"unknown config keys: {sorted(bad)}")
    return {"backend": dict(backend), "run": dict(run)}


def backend_config(file_values: dict, overrides: dict) -> BackendConfig:
    values = {**file_values, **{k: v for k, v in overrides.items() if v is not None}}
    try:
        return BackendConfig(**values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid backend config: {exc}") from exc

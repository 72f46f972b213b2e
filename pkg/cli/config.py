"""
ADAptation Run Configuration
============================
One JSON file is the source of truth for a run; flags override single
fields.

Precedence (lowest -> highest):
    built-in defaults < JSON config < environment < command-line flags

Only the output directory (ADAPTATION_OUTPUT_DIR) and the log level
(LOG_LEVEL) come from the environment. ``.env`` is loaded first.

Usage:
    from cli.config import load_run_config
    cfg = load_run_config("run.json", {"trainer.epochs": 1})
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterator, List, Literal, Mapping, Optional, Tuple

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field

from bench import BenchConfig, SyntheticSpec
from clustering import ClusterConfig
from dataio import load_json, validate_config
from geometry import LossConfig
from guards import InvalidConfig
from reconproxy import ProxyConfig
from selection import ScoringConfig
from tinynet import TrainerConfig

# Load .env BEFORE reading os.getenv
load_dotenv()

OUTPUT_DIR_ENV = "ADAPTATION_OUTPUT_DIR"


@dataclass(frozen=True)
class Settings:
    """Process-level settings read from the environment."""

    OUTPUT_DIR: Optional[str] = None
    LOG_LEVEL: str = "INFO"


def load_settings() -> Settings:
    return Settings(
        OUTPUT_DIR=os.getenv(OUTPUT_DIR_ENV) or None,
        LOG_LEVEL=os.getenv("LOG_LEVEL", Settings.LOG_LEVEL),
    )


# ═══════════════════════════════════════════════════════════════════════════════
# RUN CONFIG
# ═══════════════════════════════════════════════════════════════════════════════

class PathsConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    features: Optional[str] = None
    manifest: Optional[str] = None
    out_dir: str = "out"
    checkpoint: Optional[str] = None

    def out(self, name: str) -> Path:
        return Path(self.out_dir) / name

    def checkpoint_path(self) -> Path:
        return Path(self.checkpoint) if self.checkpoint else self.out("head.ckpt")

    def features_path(self) -> Path:
        return Path(self.features) if self.features else self.out("features.bin")

    def manifest_path(self) -> Path:
        return Path(self.manifest) if self.manifest else self.out("manifest.json")


class RunConfig(BaseModel):
    """Every module setting of a run; nested sections validate on load."""
    model_config = ConfigDict(extra="forbid")

    paths: PathsConfig = Field(default_factory=PathsConfig)
    loss: LossConfig = Field(default_factory=LossConfig)
    trainer: TrainerConfig = Field(default_factory=TrainerConfig)
    clustering: ClusterConfig = Field(default_factory=ClusterConfig)
    scoring: ScoringConfig = Field(default_factory=ScoringConfig)
    provider: Literal["proxy", "external"] = "proxy"
    proxy: ProxyConfig = Field(default_factory=ProxyConfig)
    embed_with: Literal["student", "teacher"] = "student"
    synthetic: SyntheticSpec = Field(default_factory=SyntheticSpec)
    bench: BenchConfig = Field(default_factory=BenchConfig)
    threads: int = Field(1, ge=1, le=256)

    def trainer_config(self) -> TrainerConfig:
        """Trainer settings with the run-level loss section applied."""
        return dataclasses.replace(self.trainer, loss=self.loss)

    def bench_config(self) -> BenchConfig:
        return dataclasses.replace(
            self.bench,
            trainer=dataclasses.replace(self.bench.trainer, loss=self.loss),
            scoring=self.scoring,
            clustering=self.clustering,
            proxy=self.proxy,
        )


def _merge(base: Dict[str, Any], update: Mapping[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in update.items():
        if isinstance(value, Mapping) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def _set_dotted(raw: Dict[str, Any], dotted: str, value: Any) -> None:
    node = raw
    parts = dotted.split(".")
    for part in parts[:-1]:
        child = node.setdefault(part, {})
        if not isinstance(child, dict):
            raise InvalidConfig(f"cannot override {dotted}: {part} is not a section")
        node = child
    node[parts[-1]] = value


def load_run_config(
    path: Optional[str] = None,
    overrides: Optional[Mapping[str, Any]] = None,
    settings: Optional[Settings] = None,
) -> RunConfig:
    """Defaults, then the JSON file, then the environment, then ``overrides`` (dotted keys)."""
    # start from complete defaults so partial sections keep their own defaults
    raw = _merge(RunConfig().model_dump(), load_json(path) if path else {})
    settings = settings or load_settings()
    if settings.OUTPUT_DIR:
        _set_dotted(raw, "paths.out_dir", settings.OUTPUT_DIR)
    for dotted, value in (overrides or {}).items():
        if value is not None:
            _set_dotted(raw, dotted, value)
    return validate_config(raw, RunConfig, source=path or "<defaults>")


def _walk_defaults(prefix: str, value: Any) -> Iterator[Tuple[str, Any]]:
    if isinstance(value, BaseModel):
        for name in type(value).model_fields:
            yield from _walk_defaults(f"{prefix}{name}.", getattr(value, name))
    elif dataclasses.is_dataclass(value) and not isinstance(value, type):
        for f in dataclasses.fields(value):
            yield from _walk_defaults(f"{prefix}{f.name}.", getattr(value, f.name))
    else:
        yield prefix.rstrip("."), value


def config_field_help() -> List[str]:
    """``section.field = default`` for every config field."""
    return [f"  {name} = {value!r}" for name, value in _walk_defaults("", RunConfig())]


# Singleton, loaded once
settings = load_settings()

"""
JSON configuration loading.

Turns JSON text into a validated pydantic model and maps every failure onto
the pipeline's own error classes, so callers see ParseError / DataIOError
instead of library exceptions.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Dict, Type, TypeVar

from pydantic import BaseModel, ValidationError

from guards import DataIOError, ParseError

from .features import PathLike

M = TypeVar("M", bound=BaseModel)


def load_json(path: PathLike) -> Dict[str, Any]:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataIOError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ParseError(f"{path}: top-level JSON value must be an object")
    return raw


def load_config(path: PathLike, model: Type[M]) -> M:
    """Load ``path`` and validate it as ``model``."""
    return validate_config(load_json(path), model, source=str(path))


def validate_config(raw: Dict[str, Any], model: Type[M], source: str = "<config>") -> M:
    try:
        return model.model_validate(raw)
    except ValidationError as exc:
        raise ParseError(f"{source} failed validation: {exc}") from exc

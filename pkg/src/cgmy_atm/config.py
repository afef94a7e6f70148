from __future__ import annotations

import json
import logging
import os
from pathlib import Path
from typing import Any

from cgmy_atm.models import RunConfig

logger = logging.getLogger(__name__)

CONFIG_ENV = "CGMY_ATM_CONFIG"


def config_path(explicit: str | os.PathLike | None = None) -> Path | None:
    if explicit:
        return Path(explicit)
    raw = os.environ.get(CONFIG_ENV)
    return Path(raw) if raw else None


def load_config(path: str | os.PathLike | None = None, **overrides: Any) -> RunConfig:
    """Build a RunConfig; keyword overrides whose value is None are ignored."""
    data: dict[str, Any] = {}
    source = config_path(path)
    if source is not None:
        try:
            data = json.loads(source.read_text())
        except FileNotFoundError:
            raise FileNotFoundError(f"config file {str(source)!r} does not exist") from None
        except json.JSONDecodeError as e:
            raise ValueError(f"config file {str(source)!r} is not valid JSON: {e}") from None
        if not isinstance(data, dict):
            raise ValueError(f"config file {str(source)!r} must hold a JSON object")
        logger.debug("loaded config from %s", source)
    data.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig.model_validate(data)

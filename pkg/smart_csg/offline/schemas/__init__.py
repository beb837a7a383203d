"""JSON schemas for tuning files."""

import json
import os
from functools import lru_cache
from typing import Any, Dict

SCHEMA_DIR = os.path.dirname(__file__)


@lru_cache(maxsize=None)
def get_tuning_schema() -> Dict[str, Any]:
    """Schema every stored tuning document must satisfy; read once per process."""
    with open(os.path.join(SCHEMA_DIR, "tuning_schema.json"), "r") as f:
        return json.load(f)


__all__ = ["SCHEMA_DIR", "get_tuning_schema"]

"""Bundled JSON schemas for configuration files and analysis reports."""

from __future__ import annotations

import json
from importlib import resources
from typing import Any

CONFIG_SCHEMA = "simulation_config_schema.json"
REPORT_SCHEMA = "report_schema.json"


def load_schema(name: str) -> dict[str, Any]:
    """Load a bundled JSON schema from package resources."""
    schema_file = resources.files("coupledrd.schema").joinpath(name)
    return json.loads(schema_file.read_text(encoding="utf-8"))

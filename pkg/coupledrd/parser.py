"""YAML parser for simulation configurations."""

from __future__ import annotations

import json
import logging
import math
from pathlib import Path
from typing import Any

import jsonschema
import yaml
from pydantic import ValidationError

from coupledrd.reaction import REACTIONS, build_reaction
from coupledrd.schema import CONFIG_SCHEMA, load_schema
from coupledrd.types import SimulationConfig

logger = logging.getLogger(__name__)


class ParseError(ValueError):
    """Raised when the configuration text is not valid YAML."""
    pass


class ConfigValidationError(ValueError):
    """Raised with every violation found in a configuration.

    Attributes:
        errors: One message per violation, each starting with the field path.
    """

    def __init__(self, errors: list[str]) -> None:
        self.errors = list(errors)
        listed = "\n".join(f"  - {e}" for e in self.errors)
        super().__init__(f"{len(self.errors)} configuration error(s):\n{listed}")


def _field(path: Any) -> str:
    return ".".join(str(p) for p in path) if path else "root"


class ConfigParser:
    """Load and validate simulation configuration files.

    Validation runs in three stages: YAML syntax, structure against the JSON
    schema, then cross-field semantics. Structural and semantic violations are
    collected and raised together.
    """

    def __init__(self, schema_path: str | Path | None = None) -> None:
        """Initialize parser with optional custom schema.

        Args:
            schema_path: Path to JSON schema. Uses bundled schema if None.
        """
        if schema_path:
            with open(schema_path, encoding="utf-8") as f:
                self._schema = json.load(f)
        else:
            self._schema = load_schema(CONFIG_SCHEMA)
        self._validator = jsonschema.Draft202012Validator(self._schema)

    def parse(self, filepath: str | Path) -> SimulationConfig:
        """Parse a YAML configuration file.

        Raises:
            FileNotFoundError: If file doesn't exist.
            ParseError: If YAML is malformed.
            ConfigValidationError: If the configuration is invalid.
        """
        filepath = Path(filepath)
        if not filepath.exists():
            raise FileNotFoundError(f"File not found: {filepath}")
        return self.parse_text(filepath.read_text(encoding="utf-8"))

    def parse_text(self, text: str) -> SimulationConfig:
        """Parse configuration text; see `parse`."""
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as e:
            raise ParseError(f"Invalid YAML: {e}") from e
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ParseError(f"Configuration must be a mapping, got {type(data).__name__}")
        return self.parse_data(data)

    def parse_data(self, data: dict[str, Any]) -> SimulationConfig:
        """Validate an already loaded mapping and build the typed config."""
        errors = self._structural_errors(data)
        if errors:
            raise ConfigValidationError(errors)

        expanded = _expand_kouachi(data, errors)
        errors.extend(_semantic_errors(expanded))
        if errors:
            raise ConfigValidationError(errors)

        try:
            config = SimulationConfig.model_validate(expanded)
        except ValidationError as e:
            raise ConfigValidationError(
                [f"{_field(err['loc'])}: {err['msg']}" for err in e.errors()]
            ) from e
        logger.debug("Configuration validated: d=%d, reaction=%s",
                     config.matrix.d, config.reaction.name)
        return config

    def _structural_errors(self, data: dict[str, Any]) -> list[str]:
        found = sorted(self._validator.iter_errors(data), key=lambda e: list(e.absolute_path))
        return [f"{_field(e.absolute_path)}: {e.message}" for e in found]


def _expand_kouachi(data: dict[str, Any], errors: list[str]) -> dict[str, Any]:
    """Fill matrix, reaction and boundary kind from a `kouachi` block.

    Explicit sections that contradict the preset are reported as violations.
    """
    preset = data.get("kouachi")
    if preset is None:
        return data

    expanded = dict(data)
    alpha, beta, gamma = preset["alpha"], preset["beta"], preset["gamma"]
    matrix = {"d": 2, "entries": [alpha, beta, gamma, alpha]}
    params: dict[str, Any] = {
        "sigma": preset["sigma"],
        "rho": preset["rho"],
        "f": preset.get("f_name", "uv"),
    }
    params.update(preset.get("f_params", {}))

    given = data.get("matrix")
    if given is None:
        expanded["matrix"] = matrix
    elif given.get("d") != 2 or [float(x) for x in given.get("entries", [])] != [
        float(x) for x in matrix["entries"]
    ]:
        errors.append(
            f"matrix: contradicts the kouachi preset [[{alpha}, {beta}], [{gamma}, {alpha}]]"
        )

    reaction = data.get("reaction")
    if reaction is None:
        expanded["reaction"] = {"name": "kouachi", "params": params}
    elif reaction.get("name", "zero") != "kouachi" or reaction.get("params", {}) != params:
        errors.append("reaction: contradicts the kouachi preset reaction (−σf, ρf)")

    domain = dict(data["domain"])
    if domain.get("bc", "neumann") != "neumann":
        errors.append("domain.bc: the kouachi preset needs neumann boundary conditions")
    domain["bc"] = "neumann"
    expanded["domain"] = domain

    box = preset.get("probe_box")
    if box is not None and not box[0] < box[1]:
        errors.append(f"kouachi.probe_box: lower bound must be below upper bound, got {box}")
    return expanded


def _semantic_errors(data: dict[str, Any]) -> list[str]:
    errors: list[str] = []
    domain = data["domain"]
    space_dim = domain.get("space_dim", 1)

    if len(domain["lengths"]) != space_dim:
        errors.append(
            f"domain.lengths: expected {space_dim} entries for space_dim={space_dim}, "
            f"got {len(domain['lengths'])}"
        )
    modes = data["grid"]["modes_per_axis"]
    if len(modes) != space_dim:
        errors.append(
            f"grid.modes_per_axis: expected {space_dim} entries for space_dim={space_dim}, "
            f"got {len(modes)}"
        )

    matrix = data.get("matrix")
    d = None
    if matrix is not None:
        d = matrix["d"]
        if len(matrix["entries"]) != d * d:
            errors.append(
                f"matrix.entries: expected d²={d * d} entries for d={d}, "
                f"got {len(matrix['entries'])}"
            )
        elif not all(math.isfinite(x) for x in matrix["entries"]):
            errors.append("matrix.entries: entries must be finite")

    reaction = data.get("reaction", {})
    name = reaction.get("name", "zero")
    if name not in REACTIONS:
        errors.append(
            f"reaction.name: unknown reaction '{name}', available: {', '.join(REACTIONS)}"
        )
    elif d is not None:
        try:
            build_reaction(name, reaction.get("params", {}), d=d, validate=False)
        except ValueError as e:
            errors.append(f"reaction.params: {e}")

    components = data["initial_data"]["components"]
    if d is not None and len(components) != d:
        errors.append(
            f"initial_data.components: expected {d} components for d={d}, "
            f"got {len(components)}"
        )
    grid_size = math.prod(modes)
    for i, component in enumerate(components):
        prefix = f"initial_data.components.{i}"
        values = component.get("values")
        terms = component.get("terms", [])
        if values is not None and terms:
            errors.append(f"{prefix}: give either terms or values, not both")
        if values is not None and len(values) != grid_size:
            errors.append(f"{prefix}.values: expected {grid_size} grid values, got {len(values)}")
        for j, term in enumerate(terms):
            for key in ("mode", "center"):
                if key in term and len(term[key]) != space_dim:
                    errors.append(
                        f"{prefix}.terms.{j}.{key}: expected {space_dim} entries, "
                        f"got {len(term[key])}"
                    )
    return errors


def parse_config(text: str) -> SimulationConfig:
    """Parse YAML configuration text with the bundled schema."""
    return ConfigParser().parse_text(text)


def load_config(path: str | Path) -> SimulationConfig:
    """Parse a YAML configuration file with the bundled schema."""
    return ConfigParser().parse(path)


def config_to_dict(config: SimulationConfig) -> dict[str, Any]:
    """Configuration as plain data using file keys (e.g. `lambda`)."""
    return config.model_dump(mode="json", by_alias=True, exclude_none=True)


def serialize_config(config: SimulationConfig) -> str:
    """Serialize a configuration to YAML that parses back to an equal config."""
    return yaml.safe_dump(config_to_dict(config), sort_keys=True, allow_unicode=True)

"""Loading, validating and serializing run configurations.

Run configurations are YAML documents (JSON documents are accepted too, being
a YAML subset). Validation errors from pydantic are translated into
ConfigSchemaError or ConfigInvariantError, each naming the offending path such
as ``endpoints[0].capacity``.
"""

import hashlib
import json
from collections.abc import Sequence
from pathlib import Path
from typing import Any

import yaml
from pydantic import ValidationError
from pydantic_core import ErrorDetails

from lalmeval.domain.errors import (
    ConfigError,
    ConfigInvariantError,
    ConfigIoError,
    ConfigSchemaError,
    ConfigSyntaxError,
)
from lalmeval.domain.models import RunConfig

# Pydantic error types describing the shape of the document rather than its values.
_SCHEMA_ERROR_TYPES = frozenset(
    {
        "missing",
        "extra_forbidden",
        "literal_error",
        "duplicate_name",
        "model_type",
        "model_attributes_type",
        "dataclass_type",
        "is_instance_of",
        "union_tag_invalid",
    }
)


def format_location(loc: Sequence[int | str]) -> str:
    """Render a pydantic error location as a config path.

    Args:
        loc: Location tuple such as ``("endpoints", 0, "capacity")``.

    Returns:
        Path string such as ``endpoints[0].capacity``.
    """
    path = ""
    for part in loc:
        if isinstance(part, int):
            path += f"[{part}]"
        else:
            path += f".{part}" if path else part
    return path or "<root>"


def _is_schema_error(error_type: str) -> bool:
    return error_type in _SCHEMA_ERROR_TYPES or error_type.endswith(("_type", "_parsing"))


def _translate(error: ErrorDetails) -> ConfigError:
    ctx = error.get("ctx") or {}
    path = str(ctx["path"]) if "path" in ctx else format_location(error["loc"])
    message = error["msg"].removeprefix("Value error, ")
    if _is_schema_error(error["type"]):
        return ConfigSchemaError(path, message)
    return ConfigInvariantError(path, message)


def validate_config(data: Any) -> RunConfig:
    """Validate an already-parsed document tree.

    Args:
        data: Mapping produced by a YAML or JSON parser.

    Returns:
        Validated run configuration.

    Raises:
        ConfigSchemaError: Missing, extra, duplicated or ill-typed field.
        ConfigInvariantError: Value violating an invariant.
    """
    if not isinstance(data, dict):
        raise ConfigSchemaError("<root>", "document must be a mapping")
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        # First error only; schema errors win over invariant errors.
        errors = e.errors()
        first = next((err for err in errors if _is_schema_error(err["type"])), errors[0])
        raise _translate(first) from e


def parse_config(source: str) -> RunConfig:
    """Parse and validate a run configuration document.

    Args:
        source: YAML (or JSON) text.

    Returns:
        Validated run configuration.

    Raises:
        ConfigSyntaxError: Malformed document.
        ConfigSchemaError: Missing, extra, duplicated or ill-typed field.
        ConfigInvariantError: Value violating an invariant.
    """
    try:
        data = yaml.safe_load(source)
    except yaml.YAMLError as e:
        raise ConfigSyntaxError(f"Malformed configuration document: {e}") from e
    return validate_config(data)


def load_config(path: str | Path) -> RunConfig:
    """Read and parse a configuration file.

    Args:
        path: UTF-8 YAML file.

    Returns:
        Validated run configuration.

    Raises:
        ConfigIoError: The file cannot be read.
        ConfigError: Any parse or validation error.
    """
    try:
        source = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise ConfigIoError(str(path), str(e)) from e
    return parse_config(source)


def serialize_config(config: RunConfig) -> str:
    """Serialize a configuration back to YAML.

    ``parse_config(serialize_config(c)) == c`` holds for every valid ``c``.

    Args:
        config: Run configuration.

    Returns:
        YAML text.
    """
    return yaml.safe_dump(config.model_dump(mode="json"), sort_keys=False, allow_unicode=True)


def config_fingerprint(config: RunConfig) -> str:
    """Hash of the resolved configuration.

    Args:
        config: Run configuration.

    Returns:
        Hex SHA-256 of the canonical JSON form.
    """
    canonical = json.dumps(config.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

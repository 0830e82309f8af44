"""
Scenario file loading: JSON documents validated into ScenarioFile / Scenario
"""
from pathlib import Path
from typing import Any, Dict, Optional, Union
import json
import logging

from pydantic import ValidationError

from modules.scenario import Scenario, build_scenario
from shared.errors import ConfigError
from shared.schema import ScenarioFile, TriggerStrategy

logger = logging.getLogger(__name__)


def load_json_data(file_path: Union[str, Path]) -> Dict[str, Any]:
    """Load a JSON document from file"""
    path = Path(file_path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError:
        raise ConfigError("scenario", f"file not found: {path}")
    except json.JSONDecodeError as e:
        raise ConfigError("scenario", f"{path} is not valid JSON: {e}")
    if not isinstance(data, dict):
        raise ConfigError("scenario", f"{path} must contain a JSON object")
    logger.debug(f"✓ Loaded scenario document {path}")
    return data


def _field_path(error: Dict[str, Any]) -> str:
    return ".".join(str(part) for part in error.get("loc", ())) or "scenario"


def _describe(error: Dict[str, Any]) -> str:
    if error.get("type") == "enum" and error.get("loc", ())[-1:] == ("strategy",):
        valid = ", ".join(repr(s.value) for s in TriggerStrategy)
        return f"unknown strategy {error.get('input')!r}; valid strategies: {valid}"
    if error.get("type") == "value_error" and "error" in error.get("ctx", {}):
        return str(error["ctx"]["error"])
    return error.get("msg", "invalid value")


def validate_document(data: Dict[str, Any], lenient: bool = False) -> ScenarioFile:
    """Validate a raw document; the first failure becomes a ConfigError with its dotted path"""
    try:
        return ScenarioFile.model_validate(data, context={"lenient": lenient})
    except ValidationError as e:
        first = e.errors()[0]
        raise ConfigError(_field_path(first), _describe(first)) from e


def apply_overrides(data: Dict[str, Any], strategy: Optional[str] = None, dt: Optional[float] = None,
                    horizon: Optional[float] = None, seed: Optional[int] = None,
                    out: Optional[str] = None) -> Dict[str, Any]:
    """Command-line values replace file values before validation"""
    data = json.loads(json.dumps(data))
    sections = {
        ("trigger", "strategy"): strategy,
        ("sim", "dt"): dt,
        ("sim", "horizon"): horizon,
        ("sim", "seed"): seed,
        ("output", "directory"): out,
    }
    for (section, key), value in sections.items():
        if value is not None:
            data.setdefault(section, {})[key] = value
    return data


def load_scenario_file(path: Union[str, Path], lenient: bool = False, **overrides) -> ScenarioFile:
    return validate_document(apply_overrides(load_json_data(path), **overrides), lenient=lenient)


def parse_scenario(path: Union[str, Path], **overrides) -> Scenario:
    """Read, validate and compile a scenario file"""
    return build_scenario(load_scenario_file(path, **overrides))

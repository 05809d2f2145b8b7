"""
Configuration manager for scenario files
"""
from pathlib import Path
from typing import Any, Dict, Optional
import logging

import yaml
from pydantic import ValidationError

from csslearn.errors import ConfigurationError, OutputError
from csslearn.scenario import ScenarioConfig

logger = logging.getLogger(__name__)


class ConfigManager:
    """Load and validate scenario configurations"""

    @staticmethod
    def read_file(path) -> Dict[str, Any]:
        """Parse a YAML scenario file into a mapping"""
        path = Path(path)
        try:
            with open(path, "r", encoding="utf-8") as fh:
                data = yaml.safe_load(fh)
        except OSError as e:
            raise ConfigurationError(f"cannot read config {path}: {e.strerror or e}") from e
        except yaml.YAMLError as e:
            raise ConfigurationError(f"invalid YAML in {path}: {e}") from e
        if data is None:
            return {}
        if not isinstance(data, dict):
            raise ConfigurationError(f"{path}: top level must be a mapping, got {type(data).__name__}")
        return data

    @staticmethod
    def build(data: Dict[str, Any], overrides: Optional[Dict[str, Any]] = None) -> ScenarioConfig:
        """Validate a mapping (plus non-None overrides) into a ScenarioConfig"""
        merged = dict(data)
        for key, value in (overrides or {}).items():
            if value is not None:
                merged[key] = value
        try:
            cfg = ScenarioConfig.model_validate(merged)
        except ValidationError as e:
            raise ConfigurationError(ConfigManager.describe(e)) from e
        except ValueError as e:
            raise ConfigurationError(str(e)) from e

        problems = cfg.compatibility_problems()
        if problems:
            raise ConfigurationError("; ".join(problems))
        return cfg

    @staticmethod
    def load(path=None, overrides: Optional[Dict[str, Any]] = None) -> ScenarioConfig:
        """Scenario from an optional YAML file with command line overrides applied"""
        data = ConfigManager.read_file(path) if path else {}
        cfg = ConfigManager.build(data, overrides)
        logger.info(f"Loaded scenario: {cfg.algorithm.value}, preset {cfg.preset.value}, "
                    f"{cfg.steps} steps, seed {cfg.seed}")
        return cfg

    @staticmethod
    def describe(error: ValidationError) -> str:
        """One line per validation problem, 'field.path: message'"""
        lines = []
        for item in error.errors():
            where = ".".join(str(part) for part in item.get("loc", ())) or "config"
            lines.append(f"{where}: {item.get('msg')}")
        return "; ".join(lines)

    @staticmethod
    def dump(cfg: ScenarioConfig, path) -> Path:
        """Write the fully resolved configuration next to results"""
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "w", encoding="utf-8") as fh:
                yaml.safe_dump(cfg.model_dump(mode="json"), fh, sort_keys=False)
        except OSError as e:
            raise OutputError(path, e.strerror or e) from e
        return path

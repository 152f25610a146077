"""Configuration management library with YAML support and environment overrides.

This library provides configuration management for the NXT agent harness,
including:

- YAML file loading and saving
- Configuration validation and schema checking
- `.env` loading and environment variable overrides (prefix NXT_AGENTS_)
- Configuration merging and defaults
- Project/world/program consistency checks

Usage:
    from src.lib.config import ConfigManager

    # Basic usage
    config_manager = ConfigManager("config.yaml")
    config = config_manager.load_config()

    # Missing file means built-in defaults
    config = ConfigManager("nowhere.yaml", required=False).load_config()
"""

import logging
import os
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml
from dotenv import load_dotenv
from pydantic import ValidationError

from ...models.harness_configuration import HarnessConfiguration
from .validation import (
    ConfigValidationError,
    ConfigValidator,
    ValidationResult,
    generate_example_config,
    motors_driven,
)

logger = logging.getLogger(__name__)

ENV_PREFIX = "NXT_AGENTS_"


class ConfigurationError(Exception):
    """Exception raised for configuration-related errors."""
    pass


class ConfigManager:
    """Configuration manager with YAML support, env overrides and validation."""

    def __init__(
        self,
        config_path: Union[str, Path] = "config.yaml",
        validate: bool = True,
        strict_validation: bool = False,
        required: bool = True,
        load_env_file: bool = True,
    ):
        self.config_path = Path(config_path)
        self.validate = validate
        self.strict_validation = strict_validation
        self.required = required
        self.env_prefix = ENV_PREFIX

        self._current_config: Optional[HarnessConfiguration] = None

        if load_env_file:
            load_dotenv(override=False)

    def load_config(self) -> HarnessConfiguration:
        """Load, override, validate and return the configuration."""
        config_data = self._deep_merge(generate_example_config(), self._load_yaml_file())
        config_data = self._apply_env_overrides(config_data)

        if self.validate:
            validation_result = self._validate_config(config_data)
            if not validation_result.is_valid:
                raise ConfigurationError(
                    f"Configuration validation failed: {validation_result.errors[0]}"
                )
            for warning in validation_result.warnings:
                logger.warning(warning)

        try:
            self._current_config = HarnessConfiguration(**config_data)
        except (ValidationError, ValueError) as e:
            raise ConfigurationError(f"Invalid configuration: {e}") from e
        return self._current_config

    def save_config(self, config: HarnessConfiguration) -> None:
        """Save configuration to YAML file."""
        self._save_yaml_file(config.export_dict())
        self._current_config = config

    def export_config_yaml(self, output_path: Optional[Path] = None) -> str:
        """Export current configuration to YAML string or file."""
        if not self._current_config:
            raise ConfigurationError("No configuration loaded")

        yaml_content = self._dict_to_yaml(self._current_config.export_dict())
        if output_path:
            with open(output_path, "w", encoding="utf-8") as f:
                f.write(yaml_content)
        return yaml_content

    def merge_config(self, override_data: Dict[str, Any]) -> HarnessConfiguration:
        """Merge override data with the current (or default) configuration."""
        if not self._current_config:
            base_data = generate_example_config()
        else:
            base_data = self._current_config.export_dict()

        merged_data = self._deep_merge(base_data, override_data)
        if self.validate:
            validation_result = self._validate_config(merged_data)
            if not validation_result.is_valid:
                raise ConfigurationError(
                    f"Merged configuration validation failed: {validation_result.errors[0]}"
                )
        return HarnessConfiguration(**merged_data)

    def _load_yaml_file(self) -> Dict[str, Any]:
        if not self.config_path.exists():
            if self.required:
                raise ConfigurationError(f"Configuration file not found: {self.config_path}")
            logger.debug("No configuration file at %s, using defaults", self.config_path)
            return {}

        try:
            with open(self.config_path, "r", encoding="utf-8") as f:
                data = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ConfigurationError(f"YAML parsing error: {e}")
        except OSError as e:
            raise ConfigurationError(f"Error reading config file: {e}")
        if data is None:
            return {}
        if not isinstance(data, dict):
            raise ConfigurationError("Configuration file must contain a mapping")
        return data

    def _save_yaml_file(self, config_data: Dict[str, Any]) -> None:
        try:
            self.config_path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.config_path, "w", encoding="utf-8") as f:
                f.write(self._dict_to_yaml(config_data))
        except OSError as e:
            raise ConfigurationError(f"Error writing config file: {e}")

    def _dict_to_yaml(self, data: Dict[str, Any]) -> str:
        header = f"""# NXT Agent Harness Configuration
# Generated: {datetime.now().isoformat()}
#
# Precedence: CLI flag > world file > {self.env_prefix}* environment > this file > defaults

"""
        return header + yaml.dump(data, default_flow_style=False, indent=2, sort_keys=False, allow_unicode=True)

    def _validate_config(self, config_data: Dict[str, Any]) -> ValidationResult:
        validator = ConfigValidator(strict_mode=self.strict_validation)
        return validator.validate_config(config_data)

    def _apply_env_overrides(self, config_data: Dict[str, Any]) -> Dict[str, Any]:
        """Apply NXT_AGENTS_* environment overrides."""
        env_mappings = {
            f"{self.env_prefix}OUTPUT_DIR": ["output", "directory"],
            f"{self.env_prefix}LOG_LEVEL": ["logging", "level"],
            f"{self.env_prefix}MODE": ["run", "mode"],
            f"{self.env_prefix}SEED": ["run", "seed"],
            f"{self.env_prefix}TICK_MS": ["run", "tick_ms"],
        }

        modified_data = {key: dict(value) if isinstance(value, dict) else value for key, value in config_data.items()}
        for env_var, path in env_mappings.items():
            env_value = os.getenv(env_var)
            if env_value is not None:
                self._set_nested_value(modified_data, path, self._convert_env_value(env_value, path))
        return modified_data

    def _convert_env_value(self, value: str, path: list) -> Any:
        if path[-1] in ("seed", "tick_ms"):
            try:
                return int(value)
            except ValueError:
                raise ConfigurationError(f"{self.env_prefix}{path[-1].upper()} must be an integer, got {value!r}")
        return value

    def _set_nested_value(self, data: Dict[str, Any], path: list, value: Any) -> None:
        current = data
        for key in path[:-1]:
            if key not in current or not isinstance(current[key], dict):
                current[key] = {}
            current = current[key]
        current[path[-1]] = value

    def _deep_merge(self, base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
        result = base.copy()
        for key, value in override.items():
            if key in result and isinstance(result[key], dict) and isinstance(value, dict):
                result[key] = self._deep_merge(result[key], value)
            else:
                result[key] = value
        return result


def load_config_from_file(config_path: Union[str, Path], validate: bool = True, required: bool = True) -> HarnessConfiguration:
    """Load configuration from YAML file (convenience function)."""
    return ConfigManager(config_path, validate=validate, required=required).load_config()


__all__ = [
    "ENV_PREFIX",
    "ConfigManager",
    "ConfigValidationError",
    "ConfigValidator",
    "ConfigurationError",
    "ValidationResult",
    "generate_example_config",
    "load_config_from_file",
    "motors_driven",
]

"""
Configuration Loader for the S²×S² quotient toolkit
Loads and validates numerical defaults and data paths from toolkit.yaml
"""

import os
import yaml
from pathlib import Path
from typing import Dict, Any, Optional

CONFIG_ENV_VAR = "S2S2_CONFIG"


class Config:
    """Configuration manager for the toolkit."""

    def __init__(self, config_path: Optional[Path] = None):
        """
        Initialize configuration from YAML file.

        Args:
            config_path: Path to the YAML file (defaults to $S2S2_CONFIG,
                then ./toolkit.yaml next to this module)
        """
        if config_path is None:
            env_path = os.environ.get(CONFIG_ENV_VAR)
            config_path = Path(env_path) if env_path else Path(__file__).parent / "toolkit.yaml"

        self.config_path = Path(config_path)
        self._config = self._load_config()

    def _load_config(self) -> Dict[str, Any]:
        """Load configuration from YAML file."""
        if not self.config_path.exists():
            raise FileNotFoundError(
                f"Config file not found: {self.config_path}\n"
                f"Copy config.example.yaml to toolkit.yaml or point {CONFIG_ENV_VAR} at a config file."
            )

        with open(self.config_path, 'r') as f:
            config = yaml.safe_load(f) or {}

        self._validate_config(config)

        return config

    def _validate_config(self, config: Dict[str, Any]) -> None:
        """Validate that required configuration fields are present."""
        required_sections = ['numerics', 'paths']
        for section in required_sections:
            if section not in config:
                raise ValueError(f"Missing required config section: {section}")

        numerics = config['numerics']
        for field in ['seed', 'grid', 'samples', 'tolerance']:
            if numerics.get(field) is None:
                raise ValueError(f"Missing required numerics field: {field}")

        if int(numerics['grid']) < 2:
            raise ValueError("numerics.grid must be at least 2")
        if float(numerics['tolerance']) <= 0:
            raise ValueError("numerics.tolerance must be positive")

    def _resolve(self, raw: str) -> Path:
        path = Path(raw)
        if not path.is_absolute():
            path = self.config_path.parent / path
        return path

    # ===== NUMERICS =====

    @property
    def seed(self) -> int:
        """Seed for every sampled verification."""
        return int(self._config['numerics']['seed'])

    @property
    def grid(self) -> int:
        """Grid resolution for coarse searches."""
        return int(self._config['numerics']['grid'])

    @property
    def samples(self) -> int:
        return int(self._config['numerics']['samples'])

    @property
    def tolerance(self) -> float:
        """Tolerance for single quaternion identities."""
        return float(self._config['numerics']['tolerance'])

    @property
    def composite_tolerance(self) -> float:
        """Tolerance for identities of composite maps."""
        return float(self._config['numerics'].get('composite_tolerance', 1e-9))

    @property
    def isotopy_eps(self) -> float:
        return float(self._config['numerics'].get('isotopy_eps', 0.1))

    # ===== PATHS =====

    @property
    def rings_dir(self) -> Path:
        """Directory of shipped ring presentations."""
        return self._resolve(self._config['paths'].get('rings', 'rings'))

    @property
    def expectations_file(self) -> Path:
        return self._resolve(self._config['paths'].get('expectations', 'expectations/reference_values.yaml'))

    @property
    def schema_file(self) -> Path:
        return self._resolve(self._config['paths'].get('schema', 'report.schema.json'))

    # ===== BORDISM =====

    @property
    def e8_survives(self) -> bool:
        """Whether the (4,0) term is assumed to survive to E-infinity."""
        return bool(self._config.get('bordism', {}).get('e8_survives', True))

    # ===== OUTPUT =====

    @property
    def output_format(self) -> str:
        fmt = self._config.get('output', {}).get('format', 'text')
        if fmt not in ('text', 'json'):
            raise ValueError(f"Unknown output.format: {fmt}")
        return fmt

    # ===== UTILITY METHODS =====

    def defaults(self) -> Dict[str, Any]:
        """Numerical defaults echoed into every report."""
        return {
            'seed': self.seed,
            'grid': self.grid,
            'samples': self.samples,
            'tolerance': self.tolerance,
            'composite_tolerance': self.composite_tolerance,
            'isotopy_eps': self.isotopy_eps,
        }

    def reload(self) -> None:
        """Reload configuration from file."""
        self._config = self._load_config()

    def get(self, key: str, default: Any = None) -> Any:
        """
        Get configuration value by dot-notation key.

        Example: config.get('numerics.seed')
        """
        keys = key.split('.')
        value = self._config

        for k in keys:
            if isinstance(value, dict):
                value = value.get(k)
                if value is None:
                    return default
            else:
                return default

        return value


# Global config instance
_config: Optional[Config] = None


def get_config() -> Config:
    """
    Get global configuration instance.
    Creates instance on first call, then returns cached instance.
    """
    global _config
    if _config is None:
        _config = Config()
    return _config


def reload_config(config_path: Optional[Path] = None) -> Config:
    """Reload configuration, optionally from a different file."""
    global _config
    if config_path is not None:
        _config = Config(config_path)
    elif _config is not None:
        _config.reload()
    else:
        _config = Config()
    return _config

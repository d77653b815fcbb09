"""
Configuration management for the STAR-RIS secrecy simulator
"""

import os
import re
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import structlog
import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from ..conic.solver import SolverOptions
from ..models.experiment import ExperimentKind, ExperimentSpec, Metric
from ..models.system import (
    RadioConfig,
    RateConfig,
    StarSecrecyError,
    SystemGeometry,
    Tolerances,
    db_to_linear,
    dbm_to_watts,
)

logger = structlog.get_logger(__name__)

ENV_PATTERN = re.compile(r'\$\{([^}]+)\}')


class ConfigError(StarSecrecyError):
    """Configuration file missing, malformed or invalid"""
    pass


class LoggingConfig(BaseModel):
    """Logging configuration"""
    model_config = ConfigDict(extra="forbid")

    level: str = Field(default="INFO", description="Log level")
    format: str = Field(default="console", description="Log format (json or console)")

    @field_validator('level')
    @classmethod
    def validate_log_level(cls, v):
        valid_levels = ['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL']
        if v.upper() not in valid_levels:
            raise ValueError(f'Log level must be one of: {valid_levels}')
        return v.upper()

    @field_validator('format')
    @classmethod
    def validate_format(cls, v):
        valid_formats = ['json', 'console']
        if v.lower() not in valid_formats:
            raise ValueError(f'Log format must be one of: {valid_formats}')
        return v.lower()


class RadioSettings(BaseModel):
    """Radio parameters as written in config files (logarithmic units)"""
    model_config = ConfigDict(extra="forbid")

    num_bs_antennas: int = Field(default=4, description="BS receive antennas M")
    num_ris_elements: int = Field(default=8, description="STAR-RIS elements N")
    noise_power_dbm: float = Field(default=-115.0, description="Noise power (dBm)")
    rician_factor_db: float = Field(default=3.0, description="Rician factor of the RIS-BS link (dB)")
    p_max_iu_dbm: float = Field(default=15.0, description="IU power budget (dBm)")
    p_max_ou_dbm: float = Field(default=15.0, description="OU power budget (dBm)")

    def to_radio(self) -> RadioConfig:
        return RadioConfig(
            num_bs_antennas=self.num_bs_antennas,
            num_ris_elements=self.num_ris_elements,
            noise_power=dbm_to_watts(self.noise_power_dbm),
            rician_factor=db_to_linear(self.rician_factor_db),
            p_max_iu=dbm_to_watts(self.p_max_iu_dbm),
            p_max_ou=dbm_to_watts(self.p_max_ou_dbm),
        )


class ExperimentSettings(BaseModel):
    """Experiment defaults shared by every subcommand"""
    model_config = ConfigDict(extra="forbid")

    trials: int = Field(default=20, description="Channel realizations per sweep point")
    seed: int = Field(default=0, description="Experiment seed")
    mc_trials: int = Field(default=100000, description="Eavesdropper draws per Monte-Carlo SOP estimate")
    metric: Optional[Metric] = Field(default=None, description="Reported metric; None picks the experiment default")
    schemes: List[str] = Field(default_factory=list, description="Schemes; empty picks the experiment default")
    sweeps: Dict[ExperimentKind, List[float]] = Field(default_factory=dict,
                                                      description="Sweep axis per experiment id")


class AppConfig(BaseModel):
    """Root of a simulator configuration file"""
    model_config = ConfigDict(extra="forbid")

    geometry: SystemGeometry = Field(default_factory=SystemGeometry)
    radio: RadioSettings = Field(default_factory=RadioSettings)
    rates: RateConfig = Field(default_factory=RateConfig)
    tolerances: Tolerances = Field(default_factory=Tolerances)
    solver: SolverOptions = Field(default_factory=SolverOptions)
    logging: LoggingConfig = Field(default_factory=LoggingConfig)
    experiment: ExperimentSettings = Field(default_factory=ExperimentSettings)
    workers: Optional[int] = Field(default=None, description="Worker processes; None uses the CPU count")

    def experiment_spec(self, kind: ExperimentKind, **overrides: Any) -> ExperimentSpec:
        """
        Resolve an ExperimentSpec for one experiment id

        Args:
            kind: Experiment id
            **overrides: ExperimentSpec fields taking precedence over the file (None is ignored)

        Returns:
            Validated experiment specification
        """
        settings = self.experiment
        data: Dict[str, Any] = {
            "experiment": kind,
            "sweep": settings.sweeps.get(kind, []),
            "trials": settings.trials,
            "seed": settings.seed,
            "schemes": settings.schemes if kind not in _FIXED_SCHEME_KINDS else [],
            "metric": settings.metric if kind not in _FIXED_METRIC_KINDS else None,
            "geometry": self.geometry,
            "radio": self.radio.to_radio(),
            "rates": self.rates,
            "tolerances": self.tolerances,
            "solver": self.solver,
            "mc_trials": settings.mc_trials,
            "workers": self.workers,
        }
        data.update({k: v for k, v in overrides.items() if v is not None})
        try:
            return ExperimentSpec(**data)
        except ValidationError as e:
            raise ConfigError(f"Invalid {kind.value} experiment: {e}") from e


# Experiments whose scheme list or metric is not configurable through the shared section
_FIXED_SCHEME_KINDS = (
    ExperimentKind.SOP_TIGHTNESS,
    ExperimentKind.CONVERGE_FULL,
    ExperimentKind.CONVERGE_STAT,
    ExperimentKind.QUANTIZATION,
)
_FIXED_METRIC_KINDS = _FIXED_SCHEME_KINDS


class ConfigManager:
    """Loads a YAML configuration, applies dotted overrides and validates the result"""

    def __init__(self, config_path: Optional[str] = None):
        self.config_path = config_path
        self._data: Optional[Dict[str, Any]] = None
        self._config: Optional[AppConfig] = None

    @classmethod
    def from_file(cls, config_path: str) -> "ConfigManager":
        """Create configuration manager from file"""
        return cls(config_path)

    @classmethod
    def from_env(cls) -> "ConfigManager":
        """Create configuration manager from defaults and environment variables"""
        return cls()

    def load_config(self) -> AppConfig:
        """Load and validate configuration"""
        if self._config is not None:
            return self._config
        data = self._raw_data()
        try:
            self._config = AppConfig(**data)
        except ValidationError as e:
            source = self.config_path or "environment"
            raise ConfigError(f"Invalid configuration in {source}: {e}") from e
        return self._config

    def apply_overrides(self, overrides: Sequence[str]) -> "ConfigManager":
        """
        Apply dotted `key=value` overrides, e.g. `radio.num_ris_elements=16`

        Values are parsed as YAML scalars or flow collections.

        Raises:
            ConfigError: malformed entry or unknown key
        """
        data = self._raw_data()
        for entry in overrides:
            key, sep, raw = entry.partition("=")
            if not sep or not key.strip():
                raise ConfigError(f"Override must look like key=value, got '{entry}'")
            path = key.strip().split(".")
            try:
                value = yaml.safe_load(raw)
            except yaml.YAMLError as e:
                raise ConfigError(f"Cannot parse override value '{raw}': {e}") from e
            self._assign(data, path, value, entry)
            logger.debug("Configuration override applied", key=key.strip(), value=value)
        self._config = None
        return self

    def _assign(self, data: Dict[str, Any], path: List[str], value: Any, entry: str):
        model: Any = AppConfig
        node = data
        for depth, part in enumerate(path):
            fields = getattr(model, "model_fields", None)
            if fields is None or part not in fields:
                raise ConfigError(f"Unknown configuration key '{'.'.join(path[:depth + 1])}' in override '{entry}'")
            if depth == len(path) - 1:
                node[part] = value
                return
            model = fields[part].annotation
            child = node.get(part)
            if not isinstance(child, dict):
                child = {}
                node[part] = child
            node = child

    def _raw_data(self) -> Dict[str, Any]:
        if self._data is None:
            if self.config_path:
                self._load_env_file_for_config(self.config_path)
                self._data = self._load_yaml_config(self.config_path)
            else:
                load_dotenv()
                self._data = self._load_env_config()
        return self._data

    def _load_env_file_for_config(self, config_path: str):
        """Load the first .env file found next to the configuration or in the working directory"""
        config_file = Path(config_path)
        config_dir = config_file.parent

        env_patterns = [
            config_dir / f"{config_file.stem}.env",
            config_dir / ".env",
            Path(".env"),
        ]
        for env_file in env_patterns:
            if env_file.exists():
                logger.debug("Loading environment file", env_file=str(env_file))
                load_dotenv(env_file)
                return
        load_dotenv()

    def _load_yaml_config(self, config_path: str) -> Dict[str, Any]:
        """Load configuration from YAML file"""
        config_file = Path(config_path)
        if not config_file.exists():
            raise ConfigError(f"Configuration file not found: {config_path}")
        try:
            with open(config_file, 'r', encoding='utf-8') as f:
                config_data = yaml.safe_load(f)
        except (OSError, yaml.YAMLError) as e:
            raise ConfigError(f"Cannot read configuration file {config_path}: {e}") from e

        if config_data is None:
            return {}
        if not isinstance(config_data, dict):
            raise ConfigError(f"Configuration file {config_path} must contain a mapping")
        return self._substitute_env_vars(config_data)

    def _load_env_config(self) -> Dict[str, Any]:
        """Defaults with the logging section taken from environment variables"""
        return {
            "logging": {
                "level": os.getenv("STAR_SECRECY_LOG_LEVEL", "INFO"),
                "format": os.getenv("STAR_SECRECY_LOG_FORMAT", "console"),
            },
        }

    def _substitute_env_vars(self, obj: Any) -> Any:
        """Recursively substitute ${VAR} and ${VAR:default} patterns"""
        if isinstance(obj, str):
            def replace_var(match):
                var_expr = match.group(1)
                if ':' in var_expr:
                    var_name, default_value = var_expr.split(':', 1)
                    return os.getenv(var_name.strip(), default_value.strip())
                return os.getenv(var_expr.strip(), '')

            substituted = ENV_PATTERN.sub(replace_var, obj)
            if substituted != obj:
                # Let "${N_ELEMENTS:8}" become an int rather than a string
                return yaml.safe_load(substituted) if substituted.strip() else substituted
            return obj
        if isinstance(obj, dict):
            return {k: self._substitute_env_vars(v) for k, v in obj.items()}
        if isinstance(obj, list):
            return [self._substitute_env_vars(item) for item in obj]
        return obj

    @property
    def config(self) -> AppConfig:
        """Validated configuration, loaded on first access"""
        return self.load_config()


# Global configuration instance
_config_manager: Optional[ConfigManager] = None


def get_config() -> AppConfig:
    """Global configuration, built from defaults and environment on first use"""
    global _config_manager
    if _config_manager is None:
        _config_manager = ConfigManager.from_env()
    return _config_manager.load_config()


def init_config(config_path: Optional[str] = None, overrides: Sequence[str] = ()) -> AppConfig:
    """Load the global configuration from a file (or defaults) with overrides applied"""
    global _config_manager
    if config_path:
        _config_manager = ConfigManager.from_file(config_path)
    else:
        _config_manager = ConfigManager.from_env()
    if overrides:
        _config_manager.apply_overrides(overrides)
    return _config_manager.load_config()

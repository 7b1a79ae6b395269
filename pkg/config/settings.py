"""
Global Settings and Configuration
=================================
Central configuration management for the quasicomplex workbench.

Defaults live in ``config/defaults.yaml``. Any field can be overridden from
the environment (or a ``.env`` file) as ``QCX_<FIELD NAME>``, e.g.
``QCX_RANK_TOL=1e-9``. Command-line flags override both.
"""

from pathlib import Path
from dataclasses import dataclass, fields, replace
from typing import Optional, Dict, Any
import os

import yaml
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# Base paths
BASE_DIR = Path(__file__).parent.parent
CONFIG_DIR = BASE_DIR / "config"
DEFAULTS_FILE = CONFIG_DIR / "defaults.yaml"
DATA_DIR = BASE_DIR / "data"
MESHES_DIR = DATA_DIR / "meshes"

ENV_PREFIX = "QCX_"


@dataclass(frozen=True)
class Settings:
    """Global numerical settings."""

    # Rank policy: absolute cutoff = rank_tol * max(1, largest singular value)
    rank_tol: float = 1e-10

    # A sequence is a complex when |A^{i+1} A^i| <= max(exactness_tol * |A^{i+1}||A^i|, exactness_floor)
    exactness_tol: float = 1e-10
    exactness_floor: float = 1e-12

    # Certificate thresholds
    reduction_tol: float = 1e-10
    hodge_tol: float = 1e-8
    commute_tol: float = 1e-10

    # Reductions of inputs with relative curvature above this are uncertified
    certificate_gate: float = 0.1

    # Size of the re-perturbations used by the Euler characteristic consistency trials
    euler_trial_eps: float = 1e-6

    # Randomness
    default_seed: int = 0

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Settings":
        """Create from dictionary, handling missing and unknown keys gracefully."""
        valid_fields = {f.name: f for f in fields(cls)}
        filtered_data = {}
        for key, value in data.items():
            if key not in valid_fields or value is None:
                continue
            default = getattr(cls, key, None)
            if isinstance(default, bool):
                filtered_data[key] = str(value).lower() in ("1", "true", "yes")
            elif isinstance(default, int):
                filtered_data[key] = int(value)
            elif isinstance(default, float):
                filtered_data[key] = float(value)
            else:
                filtered_data[key] = value
        return cls(**filtered_data)

    @classmethod
    def from_yaml(cls, yaml_path: Path = DEFAULTS_FILE) -> "Settings":
        """Load settings from a YAML file, then apply QCX_* environment overrides."""
        data: Dict[str, Any] = {}
        if yaml_path.exists():
            with open(yaml_path, 'r') as f:
                data = yaml.safe_load(f) or {}

        for f in fields(cls):
            env_value = os.environ.get(f"{ENV_PREFIX}{f.name.upper()}")
            if env_value is not None:
                data[f.name] = env_value

        return cls.from_dict(data)

    def with_overrides(self, **overrides: Any) -> "Settings":
        """Return a copy with the non-None overrides applied."""
        changes = {k: v for k, v in overrides.items() if v is not None}
        return replace(self, **changes) if changes else self


# Singleton settings instance
_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """Get global settings singleton."""
    global _settings
    if _settings is None:
        _settings = Settings.from_yaml()
    return _settings


def set_settings(settings: Optional[Settings]) -> None:
    """Replace the global settings (None resets to the YAML defaults on next access)."""
    global _settings
    _settings = settings

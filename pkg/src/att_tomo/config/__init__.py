"""
Defaults, experiment files and presets.
"""
from .settings import CONFIG_KEYS, PRESETS, ExperimentConfig, Settings, load_config, parse_config, preset

__all__ = ["CONFIG_KEYS", "PRESETS", "ExperimentConfig", "Settings", "load_config", "parse_config", "preset"]

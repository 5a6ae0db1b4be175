"""Config-driven runs, named acceptance presets and the command line."""
from .config import ConfigError, ExperimentConfig
from .presets import accept, list_presets
from .runner import RunReport, run

__all__ = ["ConfigError", "ExperimentConfig", "RunReport", "accept", "list_presets", "run"]

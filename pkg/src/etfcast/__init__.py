"""Sentiment-augmented ETF price movement forecasting pipeline."""

__version__ = "0.1.0"

from .config import RunConfig, config_digest, load_config, run_id_of, validate_config
from .errors import EtfcastError
from .pipeline import run

__all__ = [
    "RunConfig",
    "EtfcastError",
    "config_digest",
    "load_config",
    "run",
    "run_id_of",
    "validate_config",
    "__version__",
]

"""Run configuration: one YAML file describing an entire pipeline run.

The config digest is a sha256 over the canonical (sorted-keys) JSON
form of the config, so two files that differ only in key order digest
identically. The first 12 hex digits become the run id, which keys the
output directory; re-running an unchanged config therefore lands in the
same directory and resumes.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from datetime import date
from pathlib import Path
from typing import Any

import yaml

from .errors import ConfigError
from .evaluation.ablation import CLASSIFIER_ROSTER_DEFAULT, REGRESSOR_ROSTER_DEFAULT
from .models.classification import CLASSIFIER_FAMILIES
from .models.regression import REGRESSION_FAMILIES
from .sentiment.scoring import PROMPT_TEMPLATES

SCORING_CLIENTS = ("keyword", "http")
SOURCE_KINDS = ("fixture", "http")


@dataclass
class ScoringConfig:
    client: str = "keyword"
    prompt_version: str = "v1"
    model_id: str = ""
    base_url: str = ""
    api_key_env: str = "ETFCAST_API_KEY"
    repair_retries: int = 2


@dataclass
class SourcesConfig:
    kind: str = "fixture"
    fixture_dir: str = ""
    price_url_template: str = ""
    news_search_template: str = ""


@dataclass
class WalkForwardConfig:
    horizon: int = 20
    train_fraction: float = 0.6
    min_train: int | None = None


@dataclass
class RosterConfig:
    regressors: list[str] = field(
        default_factory=lambda: list(REGRESSOR_ROSTER_DEFAULT))
    classifiers: list[str] = field(
        default_factory=lambda: list(CLASSIFIER_ROSTER_DEFAULT))
    per_stage_sentiment: bool = False


@dataclass
class RunConfig:
    data_root: str
    output_dir: str
    symbols: list[str]
    start: str
    end: str
    sector_map: str
    sources: SourcesConfig = field(default_factory=SourcesConfig)
    scoring: ScoringConfig = field(default_factory=ScoringConfig)
    lookback: int = 5
    walk_forward: WalkForwardConfig = field(default_factory=WalkForwardConfig)
    roster: RosterConfig = field(default_factory=RosterConfig)
    grids: dict[str, list[dict[str, Any]]] = field(default_factory=dict)
    # articles published on non-trading days count toward the next
    # trading day when this is on; otherwise they fall out of the panel
    roll_forward: bool = True
    seed: int = 42
    max_workers: int = 1

    def window(self) -> tuple[date, date]:
        return date.fromisoformat(self.start), date.fromisoformat(self.end)


def validate_config(config: RunConfig) -> None:
    if not config.symbols:
        raise ConfigError("symbols list is empty")
    if len(set(config.symbols)) != len(config.symbols):
        raise ConfigError("symbols list contains duplicates")
    try:
        start, end = config.window()
    except ValueError as exc:
        raise ConfigError(f"bad study window: {exc}") from exc
    if start > end:
        raise ConfigError(f"start {config.start} after end {config.end}")
    if config.lookback < 1:
        raise ConfigError(f"lookback must be positive, got {config.lookback}")
    if config.walk_forward.horizon < 1:
        raise ConfigError("walk_forward.horizon must be positive")
    if config.walk_forward.min_train is None:
        if not (0.0 < config.walk_forward.train_fraction < 1.0):
            raise ConfigError("walk_forward.train_fraction must be in (0, 1)")
    elif config.walk_forward.min_train < 1:
        raise ConfigError("walk_forward.min_train must be positive")
    if config.seed < 0:
        raise ConfigError("seed must be non-negative")
    if config.max_workers < 0:
        raise ConfigError("max_workers must be >= 0")

    for family in config.roster.regressors:
        if family not in REGRESSION_FAMILIES:
            raise ConfigError(f"unknown model family in roster.regressors: "
                              f"{family!r}")
    for family in config.roster.classifiers:
        if family not in CLASSIFIER_FAMILIES:
            raise ConfigError(f"unknown model family in roster.classifiers: "
                              f"{family!r}")
    known_families = set(REGRESSION_FAMILIES) | set(CLASSIFIER_FAMILIES)
    for family, grid in config.grids.items():
        if family not in known_families:
            raise ConfigError(f"unknown model family in grids: {family!r}")
        if not isinstance(grid, list) or not all(isinstance(g, dict) for g in grid):
            raise ConfigError(f"grids.{family} must be a list of mappings")

    if config.scoring.client not in SCORING_CLIENTS:
        raise ConfigError(f"unknown scoring.client {config.scoring.client!r}, "
                          f"expected one of {SCORING_CLIENTS}")
    if config.scoring.prompt_version not in PROMPT_TEMPLATES:
        raise ConfigError(
            f"unknown scoring.prompt_version {config.scoring.prompt_version!r}")
    if config.scoring.client == "http" and not config.scoring.base_url:
        raise ConfigError("scoring.base_url required for the http client")
    if config.scoring.client == "http" and not config.scoring.model_id:
        raise ConfigError("scoring.model_id required for the http client")

    if config.sources.kind not in SOURCE_KINDS:
        raise ConfigError(f"unknown sources.kind {config.sources.kind!r}, "
                          f"expected one of {SOURCE_KINDS}")
    if config.sources.kind == "fixture" and not config.sources.fixture_dir:
        raise ConfigError("sources.fixture_dir required for fixture sources")
    if config.sources.kind == "http":
        if not config.sources.price_url_template:
            raise ConfigError("sources.price_url_template required")
        if not config.sources.news_search_template:
            raise ConfigError("sources.news_search_template required")


_SECTION_TYPES = {
    "sources": SourcesConfig,
    "scoring": ScoringConfig,
    "walk_forward": WalkForwardConfig,
    "roster": RosterConfig,
}

_TOP_LEVEL_KEYS = {
    "data_root", "output_dir", "symbols", "start", "end", "sector_map",
    "sources", "scoring", "lookback", "walk_forward", "roster", "grids",
    "roll_forward", "seed", "max_workers",
}

_REQUIRED_KEYS = ("data_root", "output_dir", "symbols", "start", "end",
                  "sector_map")


def _build_section(cls, raw: Any, name: str):
    if raw is None:
        return cls()
    if not isinstance(raw, dict):
        raise ConfigError(f"section {name} must be a mapping")
    known = {f for f in cls.__dataclass_fields__}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown keys in {name}: {sorted(unknown)}")
    return cls(**raw)


def config_from_dict(raw: dict[str, Any]) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping")
    unknown = set(raw) - _TOP_LEVEL_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    missing = [k for k in _REQUIRED_KEYS if k not in raw]
    if missing:
        raise ConfigError(f"missing config keys: {missing}")

    kwargs: dict[str, Any] = {}
    for key in ("data_root", "output_dir", "sector_map", "start", "end"):
        kwargs[key] = str(raw[key])
    symbols = raw["symbols"]
    if not isinstance(symbols, list):
        raise ConfigError("symbols must be a list")
    kwargs["symbols"] = [str(s) for s in symbols]
    for name, cls in _SECTION_TYPES.items():
        kwargs[name] = _build_section(cls, raw.get(name), name)
    kwargs["lookback"] = int(raw.get("lookback", 5))
    kwargs["grids"] = dict(raw.get("grids") or {})
    kwargs["roll_forward"] = bool(raw.get("roll_forward", True))
    kwargs["seed"] = int(raw.get("seed", 42))
    kwargs["max_workers"] = int(raw.get("max_workers", 1))

    config = RunConfig(**kwargs)
    validate_config(config)
    return config


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
    try:
        return config_from_dict(raw)
    except TypeError as exc:
        raise ConfigError(f"bad config structure in {path}: {exc}") from exc


def config_digest(config: RunConfig) -> str:
    canonical = json.dumps(asdict(config), sort_keys=True,
                           separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def run_id_of(config: RunConfig) -> str:
    return config_digest(config)[:12]

"""Application configuration.

One JSON file configures the server, the featurize windows, the forest
hyperparameters, the sampling schedule, and the influence thresholds.
Every key has a default, so `{}` is a valid config. Unknown keys are
rejected to catch typos early.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, fields
from datetime import date, time, timedelta
from pathlib import Path
from typing import Any, Mapping

from .errors import ConfigurationError
from .features import FeaturizeConfig
from .forest import ForestHyperparams
from .sampling import SamplingConfig

WEATHER_MODES = ("stub", "fixture", "live")


@dataclass(frozen=True)
class WeatherConfig:
    mode: str = "stub"
    fixture_path: str | None = None
    base_url: str = "https://api.openweathermap.org/data/2.5/weather"
    api_key: str | None = None
    stub: dict[str, float] = field(
        default_factory=lambda: {
            "temp_c": 15.0,
            "humidity_pct": 60.0,
            "pressure_hpa": 1013.0,
            "wind_mps": 3.0,
            "clouds_pct": 40.0,
        }
    )

    def __post_init__(self) -> None:
        if self.mode not in WEATHER_MODES:
            raise ConfigurationError(
                f"weather.mode must be one of {WEATHER_MODES}, got {self.mode!r}"
            )
        if self.mode == "fixture" and not self.fixture_path:
            raise ConfigurationError("weather.mode=fixture requires weather.fixture_path")
        if self.mode == "live" and not self.api_key:
            raise ConfigurationError("weather.mode=live requires weather.api_key")


@dataclass(frozen=True)
class InfluenceConfig:
    radius_m: float = 50.0
    slack_minutes: float = 30.0
    min_events: int = 5

    def __post_init__(self) -> None:
        if self.radius_m <= 0 or self.slack_minutes <= 0 or self.min_events < 1:
            raise ConfigurationError("influence thresholds must be positive")


@dataclass(frozen=True)
class AppConfig:
    port: int = 8000
    data_dir: str = "./data"
    tokens: dict[str, str] = field(default_factory=dict)  # token -> user id
    admin_token: str | None = None
    seed: int = 0
    n_jobs: int = 1
    min_train_examples: int = 50
    weather: WeatherConfig = field(default_factory=WeatherConfig)
    featurize: FeaturizeConfig = field(default_factory=FeaturizeConfig)
    forest: ForestHyperparams = field(default_factory=ForestHyperparams)
    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    influence: InfluenceConfig = field(default_factory=InfluenceConfig)


def _parse_time(value: str, key: str) -> time:
    try:
        hh, mm = value.split(":")
        return time(int(hh), int(mm))
    except (ValueError, AttributeError) as exc:
        raise ConfigurationError(f"{key} must look like 'HH:MM', got {value!r}") from exc


def _reject_unknown(section: Mapping[str, Any], allowed: set[str], name: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigurationError(f"unknown {name} keys: {sorted(unknown)}")


def _build_featurize(section: Mapping[str, Any]) -> FeaturizeConfig:
    _reject_unknown(
        section,
        {"join_tolerance_minutes", "vmc_window_hours", "gps_window_hours",
         "default_timezone", "holidays"},
        "featurize",
    )
    kwargs: dict[str, Any] = {}
    if "join_tolerance_minutes" in section:
        kwargs["join_tolerance"] = timedelta(minutes=float(section["join_tolerance_minutes"]))
    if "vmc_window_hours" in section:
        kwargs["vmc_window"] = timedelta(hours=float(section["vmc_window_hours"]))
    if "gps_window_hours" in section:
        kwargs["gps_window"] = timedelta(hours=float(section["gps_window_hours"]))
    if "default_timezone" in section:
        kwargs["default_timezone"] = str(section["default_timezone"])
    if "holidays" in section:
        kwargs["holidays"] = frozenset(
            date.fromisoformat(d) for d in section["holidays"]
        )
    return FeaturizeConfig(**kwargs)


def _build_forest(section: Mapping[str, Any]) -> ForestHyperparams:
    allowed = {f.name for f in fields(ForestHyperparams)}
    _reject_unknown(section, allowed, "forest")
    return ForestHyperparams(**{k: int(v) for k, v in section.items()})


def _build_sampling(section: Mapping[str, Any]) -> SamplingConfig:
    _reject_unknown(
        section,
        {"prompts_per_day", "awake_start", "awake_end", "min_gap_minutes", "expiry_minutes"},
        "sampling",
    )
    kwargs: dict[str, Any] = {}
    if "prompts_per_day" in section:
        kwargs["prompts_per_day"] = int(section["prompts_per_day"])
    if "awake_start" in section:
        kwargs["awake_start"] = _parse_time(section["awake_start"], "sampling.awake_start")
    if "awake_end" in section:
        kwargs["awake_end"] = _parse_time(section["awake_end"], "sampling.awake_end")
    if "min_gap_minutes" in section:
        kwargs["min_gap"] = timedelta(minutes=float(section["min_gap_minutes"]))
    if "expiry_minutes" in section:
        kwargs["expiry"] = timedelta(minutes=float(section["expiry_minutes"]))
    return SamplingConfig(**kwargs)


def config_from_dict(raw: Mapping[str, Any]) -> AppConfig:
    _reject_unknown(
        raw,
        {"port", "data_dir", "tokens", "admin_token", "seed", "n_jobs",
         "min_train_examples", "weather", "featurize", "forest", "sampling",
         "influence"},
        "config",
    )
    weather_raw = dict(raw.get("weather", {}))
    _reject_unknown(
        weather_raw, {"mode", "fixture_path", "base_url", "api_key", "stub"}, "weather"
    )
    influence_raw = dict(raw.get("influence", {}))
    _reject_unknown(influence_raw, {"radius_m", "slack_minutes", "min_events"}, "influence")
    try:
        return AppConfig(
            port=int(raw.get("port", 8000)),
            data_dir=str(raw.get("data_dir", "./data")),
            tokens={str(k): str(v) for k, v in raw.get("tokens", {}).items()},
            admin_token=raw.get("admin_token"),
            seed=int(raw.get("seed", 0)),
            n_jobs=int(raw.get("n_jobs", 1)),
            min_train_examples=int(raw.get("min_train_examples", 50)),
            weather=WeatherConfig(**weather_raw),
            featurize=_build_featurize(dict(raw.get("featurize", {}))),
            forest=_build_forest(dict(raw.get("forest", {}))),
            sampling=_build_sampling(dict(raw.get("sampling", {}))),
            influence=InfluenceConfig(**influence_raw),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"invalid config: {exc}") from exc


def load_config(path: str | Path | None) -> AppConfig:
    """Read a JSON config file; None means all defaults."""
    if path is None:
        return AppConfig()
    p = Path(path)
    if not p.exists():
        raise ConfigurationError(f"config file not found: {p}")
    try:
        raw = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigurationError("config root must be a JSON object")
    return config_from_dict(raw)


def config_hash(cfg: AppConfig) -> str:
    """Short stable digest of the effective config, embedded in reports."""

    def encode(obj: Any) -> Any:
        if hasattr(obj, "__dataclass_fields__"):
            return {f.name: encode(getattr(obj, f.name)) for f in fields(obj)}
        if isinstance(obj, dict):
            return {str(k): encode(v) for k, v in sorted(obj.items())}
        if isinstance(obj, (list, tuple, set, frozenset)):
            return [encode(v) for v in sorted(obj, key=str)]
        if isinstance(obj, timedelta):
            return obj.total_seconds()
        if isinstance(obj, (time, date)):
            return obj.isoformat()
        return obj

    blob = json.dumps(encode(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:12]

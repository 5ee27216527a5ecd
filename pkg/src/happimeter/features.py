"""Feature extraction: sensor/weather/mood streams into labeled vectors.

Each mood input is joined to the nearest sensor sample within a
configurable tolerance (default 15 minutes, the wearable upload cadence)
and enriched with trailing-window aggregates and hour-bucketed weather.
Joins that cannot be completed drop the example with a recorded reason
instead of imputing; only empty trailing windows impute (zero, flagged).
"""

from __future__ import annotations

import math
import re
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta, timezone, tzinfo
from typing import Callable, Mapping, NamedTuple, Sequence
from zoneinfo import ZoneInfo

import numpy as np

from .domain import (
    MoodInput,
    SensorSample,
    WeatherObservation,
    bucket_coord,
    encode_mood_state,
)
from .errors import ConfigurationError, ContractViolation, ValidationError
from .geo import haversine_m

FEATURE_NAMES = (
    "heart_rate",
    "activity",
    "vmc",
    "vmc_last_4h",
    "is_weekend_or_holiday",
    "hour_of_day",
    "light_level",
    "gps_variance",
    "temperature",
    "humidity",
    "clouds",
    "wind",
    "pressure",
)

DROP_NO_SENSOR = "no_sensor_window"
DROP_NO_WEATHER = "no_weather"
DROP_NO_POSITION = "no_sensor_position"

WeatherLookup = Callable[[tuple[float, float], datetime], "WeatherObservation | None"]


@dataclass(frozen=True)
class FeatureVector:
    """The 13 predictors, in FEATURE_NAMES order."""

    heart_rate: float
    activity: int
    vmc: float
    vmc_last_4h: float
    is_weekend_or_holiday: int
    hour_of_day: int
    light_level: int
    gps_variance: float
    temperature: float
    humidity: float
    clouds: float
    wind: float
    pressure: float

    def __post_init__(self) -> None:
        for name in FEATURE_NAMES:
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValidationError(f"feature {name} must be finite, got {v!r}")

    def as_array(self) -> np.ndarray:
        return np.array([float(getattr(self, n)) for n in FEATURE_NAMES], dtype=np.float64)


@dataclass(frozen=True)
class LabeledExample:
    features: FeatureVector
    pleasance: int
    activation: int
    mood_state: int
    user: str
    timestamp: datetime
    imputed_fields: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.mood_state != encode_mood_state(self.pleasance, self.activation):
            raise ValidationError(
                f"mood_state {self.mood_state} does not encode "
                f"({self.pleasance}, {self.activation})"
            )


@dataclass(frozen=True)
class DroppedExample:
    mood: MoodInput
    reason: str


@dataclass(frozen=True)
class FeaturizeConfig:
    join_tolerance: timedelta = timedelta(minutes=15)
    vmc_window: timedelta = timedelta(hours=4)
    gps_window: timedelta = timedelta(hours=4)
    default_timezone: str = "UTC"
    holidays: frozenset[date] = field(default_factory=frozenset)


class WindowValue(NamedTuple):
    value: float
    imputed: bool


# ---------------------------------------------------------------------------
# timezone handling

_OFFSET_RE = re.compile(r"^UTC(?P<sign>[+-])(?P<h>\d{1,2})(?::(?P<m>\d{2}))?$")


def resolve_zone(zone_id: str) -> tzinfo:
    """IANA zone id, 'UTC', or a fixed offset like 'UTC+2' / 'UTC-05:30'."""
    if zone_id == "UTC":
        return timezone.utc
    m = _OFFSET_RE.match(zone_id)
    if m:
        sign = 1 if m.group("sign") == "+" else -1
        delta = timedelta(hours=int(m.group("h")), minutes=int(m.group("m") or 0))
        return timezone(sign * delta)
    try:
        return ZoneInfo(zone_id)
    except Exception as exc:
        raise ConfigurationError(f"unknown timezone {zone_id!r}") from exc


def hour_of_day(at: datetime, zone_id: str) -> int:
    """Local wall-clock hour 0..23."""
    return at.astimezone(resolve_zone(zone_id)).hour


def is_weekend_or_holiday(
    at: datetime, zone_id: str, holidays: frozenset[date] | set[date] = frozenset()
) -> bool:
    local_date = at.astimezone(resolve_zone(zone_id)).date()
    return local_date.weekday() >= 5 or local_date in holidays


# ---------------------------------------------------------------------------
# trailing-window aggregates


def _check_sorted(samples: Sequence[SensorSample]) -> None:
    for prev, cur in zip(samples, samples[1:]):
        if cur.timestamp < prev.timestamp:
            raise ContractViolation("sensor samples must be sorted by timestamp")


def window_mean_vmc(
    samples: Sequence[SensorSample],
    at: datetime,
    window: timedelta = timedelta(hours=4),
) -> WindowValue:
    """Mean VMC over samples in (at - window, at]; empty window imputes 0."""
    _check_sorted(samples)
    times = [s.timestamp for s in samples]
    lo = bisect_right(times, at - window)
    hi = bisect_right(times, at)
    if lo >= hi:
        return WindowValue(0.0, True)
    values = [samples[i].vmc for i in range(lo, hi)]
    return WindowValue(sum(values) / len(values), False)


def gps_variance(samples: Sequence[SensorSample]) -> WindowValue:
    """Mean squared great-circle distance from each position to the centroid.

    The centroid is the arithmetic mean of latitude and longitude in
    degrees. No positioned samples imputes 0.
    """
    positions = [(s.latitude, s.longitude) for s in samples if s.has_position]
    if not positions:
        return WindowValue(0.0, True)
    lat_c = sum(lat for lat, _ in positions) / len(positions)
    lon_c = sum(lon for _, lon in positions) / len(positions)
    total = sum(haversine_m(lat, lon, lat_c, lon_c) ** 2 for lat, lon in positions)
    return WindowValue(total / len(positions), False)


def nearest_sample(
    samples: Sequence[SensorSample], at: datetime, tolerance: timedelta
) -> SensorSample | None:
    """Closest-in-time sample within tolerance; earlier one wins a tie."""
    if not samples:
        return None
    times = [s.timestamp for s in samples]
    pos = bisect_left(times, at)
    best: SensorSample | None = None
    best_dt: timedelta | None = None
    for i in (pos - 1, pos):
        if 0 <= i < len(samples):
            dt = abs(samples[i].timestamp - at)
            if dt <= tolerance and (best_dt is None or dt < best_dt):
                best = samples[i]
                best_dt = dt
    return best


# ---------------------------------------------------------------------------
# example construction


@dataclass(frozen=True)
class AssembledFeatures:
    features: FeatureVector
    imputed_fields: tuple[str, ...]
    sample: SensorSample


def assemble_features(
    history: Sequence[SensorSample],
    at: datetime,
    weather_lookup: WeatherLookup,
    cfg: FeaturizeConfig = FeaturizeConfig(),
    zone_id: str | None = None,
) -> AssembledFeatures | str:
    """Build the 13-feature vector for one instant, or a drop reason.

    `history` is one user's sample history sorted by timestamp. Used for
    both training joins (at = mood timestamp) and live prediction
    (at = now).
    """
    _check_sorted(history)
    zone_id = zone_id or cfg.default_timezone

    sample = nearest_sample(history, at, cfg.join_tolerance)
    if sample is None:
        return DROP_NO_SENSOR
    if not sample.has_position:
        return DROP_NO_POSITION

    hour_utc = at.astimezone(timezone.utc).replace(minute=0, second=0, microsecond=0)
    bucket = (bucket_coord(sample.latitude), bucket_coord(sample.longitude))
    weather = weather_lookup(bucket, hour_utc)
    if weather is None:
        return DROP_NO_WEATHER

    vmc_win = window_mean_vmc(history, at, cfg.vmc_window)
    times = [s.timestamp for s in history]
    lo = bisect_right(times, at - cfg.gps_window)
    hi = bisect_right(times, at)
    gps = gps_variance(history[lo:hi])

    imputed = tuple(
        name
        for name, flagged in (("vmc_last_4h", vmc_win.imputed), ("gps_variance", gps.imputed))
        if flagged
    )
    features = FeatureVector(
        heart_rate=sample.heart_rate,
        activity=sample.activity,
        vmc=sample.vmc,
        vmc_last_4h=vmc_win.value,
        is_weekend_or_holiday=int(is_weekend_or_holiday(at, zone_id, cfg.holidays)),
        hour_of_day=hour_of_day(at, zone_id),
        light_level=sample.light_level,
        gps_variance=gps.value,
        temperature=weather.temperature,
        humidity=weather.humidity,
        clouds=weather.clouds,
        wind=weather.wind,
        pressure=weather.pressure,
    )
    return AssembledFeatures(features=features, imputed_fields=imputed, sample=sample)


def build_labeled_example(
    mood: MoodInput,
    history: Sequence[SensorSample],
    weather_lookup: WeatherLookup,
    cfg: FeaturizeConfig = FeaturizeConfig(),
    zone_id: str | None = None,
) -> LabeledExample | DroppedExample:
    """Join one mood input to its sensor/weather context.

    Returns a DroppedExample with a reason when no sample lies within the
    join tolerance or weather cannot be resolved.
    """
    assembled = assemble_features(history, mood.timestamp, weather_lookup, cfg, zone_id)
    if isinstance(assembled, str):
        return DroppedExample(mood, assembled)
    return LabeledExample(
        features=assembled.features,
        pleasance=mood.pleasance,
        activation=mood.activation,
        mood_state=encode_mood_state(mood.pleasance, mood.activation),
        user=mood.user,
        timestamp=mood.timestamp,
        imputed_fields=assembled.imputed_fields,
    )


def build_dataset(
    moods: Sequence[MoodInput],
    samples: Sequence[SensorSample],
    weather_lookup: WeatherLookup,
    cfg: FeaturizeConfig = FeaturizeConfig(),
    zones: Mapping[str, str] | None = None,
) -> tuple[list[LabeledExample], list[DroppedExample]]:
    """Featurize a whole cohort; deterministic for identical inputs."""
    by_user: dict[str, list[SensorSample]] = {}
    for s in samples:
        by_user.setdefault(s.user, []).append(s)
    for user_samples in by_user.values():
        user_samples.sort(key=lambda s: s.timestamp)

    examples: list[LabeledExample] = []
    dropped: list[DroppedExample] = []
    for mood in sorted(moods, key=lambda m: (m.user, m.timestamp)):
        zone_id = (zones or {}).get(mood.user)
        result = build_labeled_example(
            mood, by_user.get(mood.user, []), weather_lookup, cfg, zone_id
        )
        if isinstance(result, LabeledExample):
            examples.append(result)
        else:
            dropped.append(result)
    return examples, dropped


def examples_to_matrix(examples: Sequence[LabeledExample]) -> np.ndarray:
    return np.array([ex.features.as_array() for ex in examples], dtype=np.float64)


def labels_for(examples: Sequence[LabeledExample], target: str) -> np.ndarray:
    if target == "pleasance":
        return np.array([ex.pleasance for ex in examples], dtype=np.int64)
    if target == "activation":
        return np.array([ex.activation for ex in examples], dtype=np.int64)
    if target == "mood_state":
        return np.array([ex.mood_state for ex in examples], dtype=np.int64)
    raise ValidationError(f"unknown target {target!r}")

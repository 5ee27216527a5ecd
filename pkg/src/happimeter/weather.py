"""Weather enrichment: live API client, fixture file, or constant stub.

All access goes through CachedWeather, which memoizes by (0.1 degree
location bucket, UTC hour) so each bucket-hour hits the underlying
provider at most once per process.
"""

from __future__ import annotations

from datetime import datetime, timezone
from pathlib import Path
from typing import Protocol

from .config import WeatherConfig
from .domain import WeatherObservation, bucket_coord
from .errors import ConfigurationError, EnrichmentUnavailableError

Bucket = tuple[float, float]


def hour_bucket(at: datetime) -> datetime:
    return at.astimezone(timezone.utc).replace(minute=0, second=0, microsecond=0)


class WeatherProvider(Protocol):
    def fetch(self, bucket: Bucket, hour: datetime) -> WeatherObservation: ...


class StubProvider:
    """Constant observation regardless of place and time."""

    def __init__(self, values: dict[str, float]):
        self._values = values

    def fetch(self, bucket: Bucket, hour: datetime) -> WeatherObservation:
        v = self._values
        return WeatherObservation(
            temperature=v["temp_c"],
            humidity=v["humidity_pct"],
            pressure=v["pressure_hpa"],
            wind=v["wind_mps"],
            clouds=v["clouds_pct"],
            valid_at=hour,
            location_bucket=bucket,
        )


class FixtureProvider:
    """Serves rows of a weather CSV bundle; misses are unavailable."""

    def __init__(self, path: str | Path):
        from .csvio import read_weather

        path = Path(path)
        if not path.exists():
            raise EnrichmentUnavailableError(f"weather fixture not found: {path}")
        self._rows: dict[tuple[Bucket, datetime], WeatherObservation] = {}
        for obs in read_weather(path):
            key = (obs.location_bucket, obs.valid_at)
            self._rows[key] = obs

    def fetch(self, bucket: Bucket, hour: datetime) -> WeatherObservation:
        try:
            return self._rows[(bucket, hour)]
        except KeyError:
            raise EnrichmentUnavailableError(
                f"no fixture weather for bucket {bucket} at {hour.isoformat()}"
            ) from None


class LiveProvider:
    """Fetches current conditions over HTTP (OpenWeatherMap-style payload)."""

    def __init__(self, base_url: str, api_key: str, timeout_s: float = 10.0):
        self._base_url = base_url
        self._api_key = api_key
        self._timeout_s = timeout_s

    def fetch(self, bucket: Bucket, hour: datetime) -> WeatherObservation:
        import httpx

        try:
            resp = httpx.get(
                self._base_url,
                params={
                    "lat": bucket[0],
                    "lon": bucket[1],
                    "units": "metric",
                    "appid": self._api_key,
                },
                timeout=self._timeout_s,
            )
            resp.raise_for_status()
            body = resp.json()
            return WeatherObservation(
                temperature=float(body["main"]["temp"]),
                humidity=float(body["main"]["humidity"]),
                pressure=float(body["main"]["pressure"]),
                wind=float(body["wind"]["speed"]),
                clouds=float(body["clouds"]["all"]),
                valid_at=hour,
                location_bucket=bucket,
            )
        except Exception as exc:
            raise EnrichmentUnavailableError(f"live weather fetch failed: {exc}") from exc


class CachedWeather:
    """Bucket-hour cache in front of any provider."""

    def __init__(self, provider: WeatherProvider):
        self._provider = provider
        self._cache: dict[tuple[Bucket, datetime], WeatherObservation] = {}
        self.provider_calls = 0

    def lookup(self, bucket: Bucket, hour: datetime) -> WeatherObservation:
        bucket = (bucket_coord(bucket[0]), bucket_coord(bucket[1]))
        hour = hour_bucket(hour)
        key = (bucket, hour)
        if key not in self._cache:
            self.provider_calls += 1
            self._cache[key] = self._provider.fetch(bucket, hour)
        return self._cache[key]

    def lookup_or_none(self, bucket: Bucket, hour: datetime) -> WeatherObservation | None:
        """Featurize-friendly variant: unavailable enrichment becomes None."""
        try:
            return self.lookup(bucket, hour)
        except EnrichmentUnavailableError:
            return None


def make_weather(cfg: WeatherConfig) -> CachedWeather:
    if cfg.mode == "stub":
        return CachedWeather(StubProvider(cfg.stub))
    if cfg.mode == "fixture":
        assert cfg.fixture_path is not None
        return CachedWeather(FixtureProvider(cfg.fixture_path))
    if cfg.mode == "live":
        assert cfg.api_key is not None
        return CachedWeather(LiveProvider(cfg.base_url, cfg.api_key))
    raise ConfigurationError(f"unknown weather mode {cfg.mode!r}")

"""Reading and writing the four CSV schemas shared with the simulator.

Headers are part of the interface and match the documented schemas
byte for byte. Timestamps are second-precision UTC in the form
2017-05-03T12:15:00Z; floats use Python's shortest round-trip repr so
re-emitting a bundle is byte-identical.
"""

from __future__ import annotations

import csv
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

from .domain import (
    BigFive,
    Gender,
    MoodInput,
    MoodSource,
    ParticipantProfile,
    SensorSample,
    WeatherObservation,
)
from .errors import ValidationError

SENSORS_HEADER = [
    "user_id", "timestamp_utc", "heart_rate_bpm", "activity_level",
    "vmc", "light_level", "lat", "lon",
]
MOODS_HEADER = ["user_id", "timestamp_utc", "pleasance", "activation", "source"]
WEATHER_HEADER = [
    "lat_bucket", "lon_bucket", "hour_utc", "temp_c", "humidity_pct",
    "pressure_hpa", "wind_mps", "clouds_pct",
]
PROFILES_HEADER = [
    "user_id", "age", "gender", "neuroticism", "extraversion", "openness",
    "agreeableness", "conscientiousness", "timezone",
]


def format_ts(at: datetime) -> str:
    return at.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def parse_ts(text: str, where: str) -> datetime:
    try:
        if text.endswith("Z"):
            text = text[:-1] + "+00:00"
        return datetime.fromisoformat(text).astimezone(timezone.utc)
    except ValueError as exc:
        raise ValidationError(f"{where}: bad timestamp {text!r}") from exc


def _fmt(value: float | int | None) -> str:
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    if value == int(value):
        return str(int(value))
    return repr(value)


def _check_header(got: list[str] | None, want: list[str], path: Path) -> None:
    if got != want:
        raise ValidationError(f"{path}: expected header {want}, got {got}")


# ---------------------------------------------------------------------------
# sensors


def write_sensors(path: str | Path, samples: Iterable[SensorSample]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SENSORS_HEADER)
        for s in samples:
            w.writerow([
                s.user, format_ts(s.timestamp), _fmt(s.heart_rate), s.activity,
                _fmt(s.vmc), s.light_level, _fmt(s.latitude), _fmt(s.longitude),
            ])


def read_sensors(path: str | Path) -> list[SensorSample]:
    path = Path(path)
    out: list[SensorSample] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        _check_header(next(reader, None), SENSORS_HEADER, path)
        for i, row in enumerate(reader, start=2):
            if len(row) != len(SENSORS_HEADER):
                raise ValidationError(f"{path}:{i}: expected {len(SENSORS_HEADER)} columns")
            where = f"{path}:{i}"
            try:
                out.append(SensorSample(
                    user=row[0],
                    timestamp=parse_ts(row[1], where),
                    heart_rate=float(row[2]),
                    activity=int(row[3]),
                    vmc=float(row[4]),
                    light_level=int(row[5]),
                    latitude=float(row[6]) if row[6] else None,
                    longitude=float(row[7]) if row[7] else None,
                ))
            except ValueError as exc:
                raise ValidationError(f"{where}: {exc}") from exc
    return out


# ---------------------------------------------------------------------------
# moods


def write_moods(path: str | Path, moods: Iterable[MoodInput]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(MOODS_HEADER)
        for m in moods:
            w.writerow([
                m.user, format_ts(m.timestamp), m.pleasance, m.activation,
                m.source.value,
            ])


def read_moods(path: str | Path) -> list[MoodInput]:
    path = Path(path)
    out: list[MoodInput] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        _check_header(next(reader, None), MOODS_HEADER, path)
        for i, row in enumerate(reader, start=2):
            if len(row) != len(MOODS_HEADER):
                raise ValidationError(f"{path}:{i}: expected {len(MOODS_HEADER)} columns")
            where = f"{path}:{i}"
            try:
                out.append(MoodInput(
                    user=row[0],
                    timestamp=parse_ts(row[1], where),
                    pleasance=int(row[2]),
                    activation=int(row[3]),
                    source=MoodSource(row[4]),
                ))
            except ValueError as exc:
                raise ValidationError(f"{where}: {exc}") from exc
    return out


# ---------------------------------------------------------------------------
# weather


def write_weather(path: str | Path, observations: Iterable[WeatherObservation]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(WEATHER_HEADER)
        for o in observations:
            w.writerow([
                _fmt(o.location_bucket[0]), _fmt(o.location_bucket[1]),
                format_ts(o.valid_at), _fmt(o.temperature), _fmt(o.humidity),
                _fmt(o.pressure), _fmt(o.wind), _fmt(o.clouds),
            ])


def read_weather(path: str | Path) -> list[WeatherObservation]:
    path = Path(path)
    out: list[WeatherObservation] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        _check_header(next(reader, None), WEATHER_HEADER, path)
        for i, row in enumerate(reader, start=2):
            if len(row) != len(WEATHER_HEADER):
                raise ValidationError(f"{path}:{i}: expected {len(WEATHER_HEADER)} columns")
            where = f"{path}:{i}"
            try:
                out.append(WeatherObservation(
                    location_bucket=(float(row[0]), float(row[1])),
                    valid_at=parse_ts(row[2], where),
                    temperature=float(row[3]),
                    humidity=float(row[4]),
                    pressure=float(row[5]),
                    wind=float(row[6]),
                    clouds=float(row[7]),
                ))
            except ValueError as exc:
                raise ValidationError(f"{where}: {exc}") from exc
    return out


# ---------------------------------------------------------------------------
# profiles


def write_profiles(path: str | Path, profiles: Iterable[ParticipantProfile]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(PROFILES_HEADER)
        for p in profiles:
            b5 = p.big_five
            w.writerow([
                p.user, _fmt(p.age), p.gender.value,
                _fmt(b5.neuroticism if b5 else None),
                _fmt(b5.extraversion if b5 else None),
                _fmt(b5.openness if b5 else None),
                _fmt(b5.agreeableness if b5 else None),
                _fmt(b5.conscientiousness if b5 else None),
                p.timezone,
            ])


def read_profiles(path: str | Path) -> list[ParticipantProfile]:
    path = Path(path)
    out: list[ParticipantProfile] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        _check_header(next(reader, None), PROFILES_HEADER, path)
        for i, row in enumerate(reader, start=2):
            if len(row) != len(PROFILES_HEADER):
                raise ValidationError(f"{path}:{i}: expected {len(PROFILES_HEADER)} columns")
            where = f"{path}:{i}"
            try:
                big_five = None
                b5_cells = row[3:8]
                if any(b5_cells):
                    if not all(b5_cells):
                        raise ValidationError(
                            f"{where}: partial Big Five scores are not allowed"
                        )
                    big_five = BigFive(*(float(v) for v in b5_cells))
                out.append(ParticipantProfile(
                    user=row[0],
                    age=int(row[1]) if row[1] else None,
                    gender=Gender(row[2]) if row[2] else Gender.UNKNOWN,
                    big_five=big_five,
                    timezone=row[8] or "UTC",
                ))
            except ValueError as exc:
                raise ValidationError(f"{where}: {exc}") from exc
    return out


# ---------------------------------------------------------------------------
# generic report emission


def write_report_csv(
    path: str | Path,
    header: Sequence[str],
    rows: Iterable[Sequence[object]],
    comment: str | None = None,
) -> None:
    """Write a report table, optionally preceded by a `#`-prefixed comment line."""
    with open(path, "w", newline="") as fh:
        if comment is not None:
            fh.write(f"# {comment}\n")
        w = csv.writer(fh)
        w.writerow(list(header))
        for row in rows:
            w.writerow(list(row))

"""Synthetic cohort generator with planted, recoverable ground truth.

The "weather-hour" rule makes mood a deterministic function of exactly
the values the feature pipeline will see (temperature of the joined
sample's weather bucket, local hour of the mood timestamp), so model
accuracy and feature importances have known targets. Friend influence is
planted by relocating a friend's sensor trail to the subject's home
during randomly chosen prompt windows and bumping the subject's
pleasance there.

Everything is derived from per-purpose rng substreams of the cohort
seed; re-running a spec writes byte-identical files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from datetime import date, datetime, time, timedelta, timezone
from pathlib import Path

import numpy as np

from .csvio import (
    format_ts,
    write_moods,
    write_profiles,
    write_sensors,
    write_weather,
)
from .domain import (
    BigFive,
    Gender,
    MoodInput,
    MoodSource,
    ParticipantProfile,
    SensorSample,
    WeatherObservation,
    bucket_coord,
    encode_mood_state,
)
from .errors import ConfigurationError, ContractViolation
from .sampling import SamplingConfig, generate_schedule

RULE_WEATHER_HOUR = "weather-hour"
KNOWN_RULES = (RULE_WEATHER_HOUR,)

HOME_LAT_0 = 48.0
HOME_LAT_STEP = 0.1
HOME_LON = 11.5
SLOT_MINUTES = 15
SESSION_HALF_WIDTH = timedelta(minutes=20)

_STREAM_WEATHER = 1
_STREAM_SENSORS = 2
_STREAM_NOISE = 3
_STREAM_COPRESENCE = 4
_STREAM_PROFILE = 5


@dataclass(frozen=True)
class PlantedEdge:
    """A friendship whose co-presence shifts the subject's pleasance."""

    subject: str
    friend: str
    effect: int = 1
    copresence_rate: float = 0.5

    def __post_init__(self) -> None:
        if self.subject == self.friend:
            raise ConfigurationError("edge endpoints must differ")
        if not 0.0 <= self.copresence_rate <= 1.0:
            raise ConfigurationError("copresence_rate must be in [0, 1]")
        if self.effect not in (-2, -1, 0, 1, 2):
            raise ConfigurationError("effect must be a small integer shift")


@dataclass(frozen=True)
class CohortSpec:
    seed: int = 0
    n_users: int = 20
    n_days: int = 30
    rule: str = RULE_WEATHER_HOUR
    noise: float = 0.1
    start: date = date(2017, 5, 1)
    temp_range: tuple[float, float] = (8.0, 28.0)
    edges: tuple[PlantedEdge, ...] = ()
    sampling: SamplingConfig = field(default_factory=SamplingConfig)

    def __post_init__(self) -> None:
        if self.rule not in KNOWN_RULES:
            raise ConfigurationError(
                f"unknown rule {self.rule!r}, known: {list(KNOWN_RULES)}"
            )
        if not 0.0 <= self.noise <= 1.0:
            raise ConfigurationError("noise rate must be in [0, 1]")
        if self.n_users < 1 or self.n_days < 1:
            raise ConfigurationError("n_users and n_days must be >= 1")
        if self.temp_range[0] >= self.temp_range[1]:
            raise ConfigurationError("temp_range must be (low, high)")

    @property
    def users(self) -> list[str]:
        width = max(2, len(str(self.n_users)))
        return [f"u{i + 1:0{width}d}" for i in range(self.n_users)]


def rule_labels(rule: str, temp_c: float, local_hour: int) -> tuple[int, int]:
    """The planted mood function, pre noise and friend effects."""
    if rule != RULE_WEATHER_HOUR:
        raise ConfigurationError(f"unknown rule {rule!r}")
    pleasance = 2 if temp_c > 18.0 else 1
    if local_hour in (11, 12, 13, 17, 18, 19):
        activation = 2
    elif local_hour >= 20:
        activation = 0
    else:
        activation = 1
    return pleasance, activation


def _stream(seed: int, stream: int, *extra: int) -> np.random.Generator:
    return np.random.default_rng([seed & 0xFFFFFFFF, stream, *extra])


def _home(user_index: int) -> tuple[float, float]:
    return (HOME_LAT_0 + HOME_LAT_STEP * user_index, HOME_LON)


def _flip_pair(p: int, a: int, k: int) -> tuple[int, int]:
    """The k-th (0..7) of the 8 cells different from (p, a), row-major."""
    cells = [(pp, aa) for pp in (0, 1, 2) for aa in (0, 1, 2) if (pp, aa) != (p, a)]
    return cells[k]


_BUSY_HOURS = frozenset((11, 12, 13, 17, 18, 19))


def _slot_activity(hour: int, rng: np.random.Generator) -> int:
    """Movement counts follow the day: lunch and after-work bursts,
    a daytime trickle, near-stillness overnight. The draw count is the
    same in every branch so the stream stays slot-aligned."""
    if hour in _BUSY_HOURS:
        return int(rng.integers(2, 6))
    if 8 <= hour < 20:
        return int(rng.integers(0, 4))
    if hour >= 20 and hour < 22:
        return int(rng.integers(0, 3))
    return int(rng.integers(0, 2))


def _slot_light(hour: int, rng: np.random.Generator) -> int:
    """Ambient light bins: daylight, dusk, indoor evening, dark."""
    if 8 <= hour < 18:
        return int(rng.integers(3, 6))
    if hour in (6, 7, 18, 19):
        return int(rng.integers(1, 4))
    return int(rng.integers(0, 2))


@dataclass(frozen=True)
class GroundTruth:
    """Everything a verifier needs, written as manifest.json."""

    spec: CohortSpec
    n_sensor_rows: int
    n_mood_rows: int
    n_weather_rows: int
    expected_joined_examples: int
    n_noise_flips: int
    clean_label_counts: dict[str, dict[int, int]]
    emitted_label_counts: dict[str, dict[int, int]]
    edge_truth: list[dict]
    homes: dict[str, tuple[float, float]]


def simulate(spec: CohortSpec, out_dir: str | Path) -> GroundTruth:
    """Write sensors/moods/weather/profiles CSVs plus manifest.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    users = spec.users
    user_index = {u: i for i, u in enumerate(users)}
    for edge in spec.edges:
        for endpoint in (edge.subject, edge.friend):
            if endpoint not in user_index:
                raise ConfigurationError(f"edge references unknown user {endpoint!r}")

    days = [spec.start + timedelta(days=d) for d in range(spec.n_days)]
    homes = {u: _home(i) for u, i in user_index.items()}

    # Prompt schedules: one per (user, day), all in the cohort's UTC frame.
    schedules = {
        (u, d): generate_schedule(u, d, "UTC", spec.seed, spec.sampling)
        for u in users
        for d in days
    }

    # Co-presence sessions per edge, decided per subject prompt.
    sessions_by_friend: dict[str, list[tuple[datetime, datetime, str]]] = {}
    edge_truth: list[dict] = []
    copresent_at: dict[tuple[str, str], set[str]] = {}
    for e_idx, edge in enumerate(spec.edges):
        rng = _stream(spec.seed, _STREAM_COPRESENCE, e_idx)
        truth_times: list[str] = []
        n_prompts = 0
        for d in days:
            for prompt in schedules[(edge.subject, d)].prompts:
                n_prompts += 1
                if rng.random() < edge.copresence_rate:
                    t = prompt.fire_at
                    sessions_by_friend.setdefault(edge.friend, []).append(
                        (t - SESSION_HALF_WIDTH, t + SESSION_HALF_WIDTH, edge.subject)
                    )
                    truth_times.append(format_ts(t))
        copresent_at[(edge.subject, edge.friend)] = set(truth_times)
        edge_truth.append({
            "subject": edge.subject,
            "friend": edge.friend,
            "effect": edge.effect,
            "copresence_rate": edge.copresence_rate,
            "n_prompts": n_prompts,
            "n_copresent": len(truth_times),
            "copresent_prompts": truth_times,
        })
    for sess in sessions_by_friend.values():
        sess.sort()

    # Sensor trail: one sample every 15 minutes, all day, every user.
    samples: list[SensorSample] = []
    samples_by_user: dict[str, list[SensorSample]] = {}
    slots_per_day = (24 * 60) // SLOT_MINUTES
    for u in users:
        rng = _stream(spec.seed, _STREAM_SENSORS, user_index[u])
        relocations = sessions_by_friend.get(u, [])
        home_lat, home_lon = homes[u]
        mine: list[SensorSample] = []
        for d in days:
            day_start = datetime.combine(d, time(0, 0), tzinfo=timezone.utc)
            for slot in range(slots_per_day):
                at = day_start + timedelta(minutes=SLOT_MINUTES * slot)
                lat = home_lat + float(rng.uniform(-2e-4, 2e-4))
                lon = home_lon + float(rng.uniform(-2e-4, 2e-4))
                activity = _slot_activity(at.hour, rng)
                heart = float(np.clip(rng.normal(62.0 + 5.0 * activity, 7.0), 40.0, 180.0))
                vmc = float(abs(rng.normal(60.0 + 90.0 * activity, 80.0)))
                light = _slot_light(at.hour, rng)
                for lo, hi, subject in relocations:
                    if lo <= at <= hi:
                        s_lat, s_lon = homes[subject]
                        lat = s_lat + float(rng.uniform(-1e-4, 1e-4))
                        lon = s_lon + float(rng.uniform(-1e-4, 1e-4))
                        break
                mine.append(SensorSample(
                    user=u,
                    timestamp=at,
                    heart_rate=round(heart, 1),
                    activity=activity,
                    vmc=round(vmc, 1),
                    light_level=light,
                    latitude=round(lat, 6),
                    longitude=round(lon, 6),
                ))
        samples_by_user[u] = mine
        samples.extend(mine)

    # Weather: every home bucket gets a row for every hour of the cohort.
    buckets = sorted({(bucket_coord(lat), bucket_coord(lon)) for lat, lon in homes.values()})
    observations: list[WeatherObservation] = []
    weather_temp: dict[tuple[tuple[float, float], datetime], float] = {}
    t_lo, t_hi = spec.temp_range
    for b_idx, bucket in enumerate(buckets):
        for d_idx, d in enumerate(days):
            rng = _stream(spec.seed, _STREAM_WEATHER, b_idx, d_idx)
            day_start = datetime.combine(d, time(0, 0), tzinfo=timezone.utc)
            for hour in range(24):
                at = day_start + timedelta(hours=hour)
                temp = round(float(rng.uniform(t_lo, t_hi)), 2)
                obs = WeatherObservation(
                    temperature=temp,
                    humidity=round(float(rng.uniform(30.0, 90.0)), 1),
                    pressure=round(float(rng.uniform(990.0, 1030.0)), 1),
                    wind=round(float(rng.uniform(0.0, 10.0)), 2),
                    clouds=round(float(rng.uniform(0.0, 100.0)), 1),
                    valid_at=at,
                    location_bucket=bucket,
                )
                observations.append(obs)
                weather_temp[(bucket, at)] = temp

    # Moods: answer every prompt; label from the joined sample's context.
    effects_by_subject: dict[str, list[PlantedEdge]] = {}
    for edge in spec.edges:
        effects_by_subject.setdefault(edge.subject, []).append(edge)

    moods: list[MoodInput] = []
    n_flips = 0
    clean_counts = {"pleasance": {}, "activation": {}, "mood_state": {}}
    emitted_counts = {"pleasance": {}, "activation": {}, "mood_state": {}}

    def bump(table: dict[str, dict[int, int]], p: int, a: int) -> None:
        for key, value in (
            ("pleasance", p), ("activation", a), ("mood_state", encode_mood_state(p, a)),
        ):
            table[key][value] = table[key].get(value, 0) + 1

    for u in users:
        rng = _stream(spec.seed, _STREAM_NOISE, user_index[u])
        mine = samples_by_user[u]
        slot_times = [s.timestamp for s in mine]
        for d in days:
            for prompt in schedules[(u, d)].prompts:
                t = prompt.fire_at
                # nearest sample: slots are every 15 min, so the closest is
                # within 7.5 min and the 15-min featurize join always lands
                offset = (t - slot_times[0]).total_seconds() / 60.0
                idx = int(offset // SLOT_MINUTES)
                best = min(
                    (i for i in (idx, idx + 1) if 0 <= i < len(mine)),
                    key=lambda i: abs((slot_times[i] - t).total_seconds()),
                )
                joined = mine[best]
                bucket = (bucket_coord(joined.latitude), bucket_coord(joined.longitude))
                hour_key = t.replace(minute=0, second=0, microsecond=0)
                temp = weather_temp[(bucket, hour_key)]
                local_hour = t.hour  # cohort runs in UTC wall time
                p, a = rule_labels(spec.rule, temp, local_hour)
                for edge in effects_by_subject.get(u, ()):
                    if format_ts(t) in copresent_at[(u, edge.friend)]:
                        p = max(0, min(2, p + edge.effect))
                bump(clean_counts, p, a)
                if rng.random() < spec.noise:
                    p, a = _flip_pair(p, a, int(rng.integers(0, 8)))
                    n_flips += 1
                bump(emitted_counts, p, a)
                moods.append(MoodInput(
                    user=u, timestamp=t, pleasance=p, activation=a,
                    source=MoodSource.PROMPTED,
                ))

    # Profiles: stable demographics, Big Five from the profile stream.
    profiles: list[ParticipantProfile] = []
    for u in users:
        i = user_index[u]
        rng = _stream(spec.seed, _STREAM_PROFILE, i)
        scores = [round(float(v), 2) for v in rng.uniform(1.0, 5.0, size=5)]
        profiles.append(ParticipantProfile(
            user=u,
            age=22 + (i * 7) % 40,
            gender=Gender.MALE if i % 2 == 0 else Gender.FEMALE,
            big_five=BigFive(*scores),
            timezone="UTC",
        ))

    samples.sort(key=lambda s: (s.user, s.timestamp))
    moods.sort(key=lambda m: (m.user, m.timestamp))
    observations.sort(key=lambda o: (o.location_bucket, o.valid_at))

    write_sensors(out / "sensors.csv", samples)
    write_moods(out / "moods.csv", moods)
    write_weather(out / "weather.csv", observations)
    write_profiles(out / "profiles.csv", profiles)

    # By construction every mood joins (7.5 min worst case, full weather).
    expected_joined = len(moods)
    truth = GroundTruth(
        spec=spec,
        n_sensor_rows=len(samples),
        n_mood_rows=len(moods),
        n_weather_rows=len(observations),
        expected_joined_examples=expected_joined,
        n_noise_flips=n_flips,
        clean_label_counts=clean_counts,
        emitted_label_counts=emitted_counts,
        edge_truth=edge_truth,
        homes=homes,
    )
    (out / "manifest.json").write_text(manifest_json(truth))
    return truth


def manifest_json(truth: GroundTruth) -> str:
    spec = truth.spec
    doc = {
        "format": "happimeter-cohort/1",
        "rule": spec.rule,
        "rule_text": {
            "pleasance": "2 if joined-bucket temperature > 18 C else 1",
            "activation": "2 in local hours 11-13 and 17-19, 0 from 20:00, else 1",
            "noise": "with probability `noise`, replace (pleasance, activation) "
                     "with a uniformly chosen different grid cell",
            "friend_effect": "pleasance shifted by `effect` (clamped to [0,2]) "
                             "at co-present prompts, before noise",
        },
        "seed": spec.seed,
        "n_users": spec.n_users,
        "n_days": spec.n_days,
        "start": spec.start.isoformat(),
        "noise": spec.noise,
        "temp_range": list(spec.temp_range),
        "sampling": {
            "prompts_per_day": spec.sampling.prompts_per_day,
            "awake_start": spec.sampling.awake_start.isoformat(timespec="minutes"),
            "awake_end": spec.sampling.awake_end.isoformat(timespec="minutes"),
            "min_gap_minutes": spec.sampling.min_gap.total_seconds() / 60.0,
            "expiry_minutes": spec.sampling.expiry.total_seconds() / 60.0,
        },
        "homes": {u: list(pos) for u, pos in sorted(truth.homes.items())},
        "counts": {
            "sensor_rows": truth.n_sensor_rows,
            "mood_rows": truth.n_mood_rows,
            "weather_rows": truth.n_weather_rows,
            "expected_joined_examples": truth.expected_joined_examples,
            "noise_flips": truth.n_noise_flips,
        },
        "clean_label_counts": {
            t: {str(k): v for k, v in sorted(c.items())}
            for t, c in truth.clean_label_counts.items()
        },
        "emitted_label_counts": {
            t: {str(k): v for k, v in sorted(c.items())}
            for t, c in truth.emitted_label_counts.items()
        },
        "edges": truth.edge_truth,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def load_manifest(path: str | Path) -> dict:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"manifest not found: {p}")
    return json.loads(p.read_text())


def influence_cohort_spec(seed: int = 0, negative: bool = False) -> CohortSpec:
    """A compact cohort tuned for clean influence recovery.

    Low noise and a narrower temperature range (P(temp > 18) = 1/3) keep
    the point-biserial correlation of the planted friend well above the
    ranking threshold; a low-rate zero-effect control edge must rank
    below it.
    """
    effect = -1 if negative else 1
    return CohortSpec(
        seed=seed,
        n_users=6,
        n_days=20,
        noise=0.05,
        temp_range=(12.0, 21.0),
        edges=(
            PlantedEdge(subject="u01", friend="u02", effect=effect, copresence_rate=0.5),
            PlantedEdge(subject="u01", friend="u03", effect=0, copresence_rate=0.15),
        ),
    )


def with_noise(spec: CohortSpec, noise: float) -> CohortSpec:
    return replace(spec, noise=noise)

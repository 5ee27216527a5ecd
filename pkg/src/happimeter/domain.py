"""Core value types: mood inputs, sensor samples, profiles, friendships.

All types here are immutable values. Range invariants are enforced at
construction time and raise :class:`ValidationError` when broken.

Mood is recorded on two 0..2 scales, pleasance (valence) and activation
(arousal). The nine combinations form a 3x3 grid; each cell has a
categorical code 1..9 with code 1 at high pleasance / high activation and
code 9 at low / low.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from enum import Enum

from .errors import ValidationError

MAX_USER_ID_LEN = 64

# Display words for the nine grid cells, keyed by state code. Purely
# cosmetic defaults; they never affect any computation and can be
# overridden through configuration.
DEFAULT_STATE_LABELS: dict[int, str] = {
    1: "happy",
    2: "excited",
    3: "angry",
    4: "content",
    5: "neutral",
    6: "tense",
    7: "relaxed",
    8: "tired",
    9: "sad",
}


def validate_user_id(user: str) -> str:
    """Check a user id is a non-empty string of at most 64 chars."""
    if not isinstance(user, str) or not user:
        raise ValidationError("user id must be a non-empty string")
    if len(user) > MAX_USER_ID_LEN:
        raise ValidationError(f"user id longer than {MAX_USER_ID_LEN} chars")
    return user


def _require_level(name: str, value: int, lo: int, hi: int) -> None:
    if not isinstance(value, int) or isinstance(value, bool) or not lo <= value <= hi:
        raise ValidationError(f"{name} must be an integer in {{{lo}..{hi}}}, got {value!r}")


def _require_utc(name: str, value: datetime) -> datetime:
    """Reject naive datetimes and pin aware ones to UTC.

    Serialization prints instants with a Z suffix, so anything carrying
    a non-zero offset must be converted, not just accepted.
    """
    if value.tzinfo is None or value.utcoffset() is None:
        raise ValidationError(f"{name} must be timezone-aware (UTC)")
    if value.utcoffset() != timedelta(0):
        return value.astimezone(timezone.utc)
    return value


def encode_mood_state(pleasance: int, activation: int) -> int:
    """Map a (pleasance, activation) pair to its grid code 1..9.

    Code 1 is high/high, code 9 is low/low; codes run row-major from the
    high-activation row down, each row from high pleasance to low.
    """
    _require_level("pleasance", pleasance, 0, 2)
    _require_level("activation", activation, 0, 2)
    return 1 + (2 - pleasance) + 3 * (2 - activation)


def decode_mood_state(code: int) -> tuple[int, int]:
    """Invert :func:`encode_mood_state`; returns (pleasance, activation)."""
    _require_level("mood state code", code, 1, 9)
    pleasance = 2 - (code - 1) % 3
    activation = 2 - (code - 1) // 3
    return pleasance, activation


@dataclass(frozen=True)
class MoodState:
    """One cell of the nine-cell mood grid."""

    code: int
    label: str

    def __post_init__(self) -> None:
        _require_level("mood state code", self.code, 1, 9)
        if not self.label:
            raise ValidationError("mood state label must be non-empty")

    @classmethod
    def from_levels(
        cls, pleasance: int, activation: int, labels: dict[int, str] | None = None
    ) -> "MoodState":
        code = encode_mood_state(pleasance, activation)
        table = labels if labels is not None else DEFAULT_STATE_LABELS
        return cls(code=code, label=table[code])


class MoodSource(str, Enum):
    PROMPTED = "prompted"
    MANUAL = "manual"


@dataclass(frozen=True)
class MoodInput:
    """A self-reported (pleasance, activation) pair."""

    user: str
    timestamp: datetime
    pleasance: int
    activation: int
    source: MoodSource = MoodSource.MANUAL

    def __post_init__(self) -> None:
        validate_user_id(self.user)
        object.__setattr__(self, "timestamp", _require_utc("timestamp", self.timestamp))
        _require_level("pleasance", self.pleasance, 0, 2)
        _require_level("activation", self.activation, 0, 2)
        if not isinstance(self.source, MoodSource):
            object.__setattr__(self, "source", MoodSource(self.source))

    @property
    def mood_state(self) -> int:
        return encode_mood_state(self.pleasance, self.activation)

    def is_future_of(self, received_at: datetime, skew_seconds: float = 300.0) -> bool:
        """True when the timestamp lies beyond the receipt time plus skew."""
        return (self.timestamp - received_at).total_seconds() > skew_seconds


@dataclass(frozen=True)
class SensorSample:
    """One 15-minute wearable reading.

    Coordinates may be absent (watch without a fix); when present they
    must be valid degrees.
    """

    user: str
    timestamp: datetime
    heart_rate: float
    activity: int
    vmc: float
    light_level: int
    latitude: float | None = None
    longitude: float | None = None

    def __post_init__(self) -> None:
        validate_user_id(self.user)
        object.__setattr__(self, "timestamp", _require_utc("timestamp", self.timestamp))
        if not 0.0 <= self.heart_rate <= 300.0:
            raise ValidationError(f"heart_rate out of [0, 300]: {self.heart_rate!r}")
        _require_level("activity", self.activity, 0, 5)
        _require_level("light_level", self.light_level, 0, 5)
        if self.vmc < 0:
            raise ValidationError(f"vmc must be non-negative, got {self.vmc!r}")
        if (self.latitude is None) != (self.longitude is None):
            raise ValidationError("latitude and longitude must be given together")
        if self.latitude is not None:
            if not -90.0 <= self.latitude <= 90.0:
                raise ValidationError(f"latitude out of [-90, 90]: {self.latitude!r}")
            if not -180.0 <= self.longitude <= 180.0:
                raise ValidationError(f"longitude out of [-180, 180]: {self.longitude!r}")

    @property
    def has_position(self) -> bool:
        return self.latitude is not None


def bucket_coord(value: float) -> float:
    """Round a coordinate to the 0.1 degree grid used for weather joins."""
    return round(round(value * 10.0) / 10.0, 1)


@dataclass(frozen=True)
class WeatherObservation:
    """Weather for one hour in one 0.1 degree location bucket."""

    temperature: float
    humidity: float
    pressure: float
    wind: float
    clouds: float
    valid_at: datetime
    location_bucket: tuple[float, float]

    def __post_init__(self) -> None:
        object.__setattr__(self, "valid_at", _require_utc("valid_at", self.valid_at))
        for name in ("temperature", "humidity", "pressure", "wind", "clouds"):
            v = getattr(self, name)
            if v != v or v in (float("inf"), float("-inf")):
                raise ValidationError(f"{name} must be finite, got {v!r}")
        if not 0.0 <= self.humidity <= 100.0:
            raise ValidationError(f"humidity out of [0, 100]: {self.humidity!r}")
        if not 0.0 <= self.clouds <= 100.0:
            raise ValidationError(f"clouds out of [0, 100]: {self.clouds!r}")
        if self.pressure <= 0:
            raise ValidationError(f"pressure must be > 0: {self.pressure!r}")
        if self.wind < 0:
            raise ValidationError(f"wind must be >= 0: {self.wind!r}")


class Gender(str, Enum):
    FEMALE = "female"
    MALE = "male"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class BigFive:
    """IPIP-style personality scores, ingested as given numbers."""

    neuroticism: float
    extraversion: float
    openness: float
    agreeableness: float
    conscientiousness: float

    def __post_init__(self) -> None:
        for name in (
            "neuroticism",
            "extraversion",
            "openness",
            "agreeableness",
            "conscientiousness",
        ):
            v = getattr(self, name)
            if v != v or v in (float("inf"), float("-inf")):
                raise ValidationError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class ParticipantProfile:
    user: str
    age: int | None = None
    gender: Gender = Gender.UNKNOWN
    big_five: BigFive | None = None
    timezone: str = "UTC"

    def __post_init__(self) -> None:
        validate_user_id(self.user)
        if self.age is not None and not 10 <= self.age <= 120:
            raise ValidationError(f"age out of [10, 120]: {self.age!r}")
        if not isinstance(self.gender, Gender):
            object.__setattr__(self, "gender", Gender(self.gender))


class FriendshipStatus(str, Enum):
    PENDING = "pending"
    ACCEPTED = "accepted"


@dataclass(frozen=True)
class Friendship:
    """An unordered friendship pair with per-direction sharing flags.

    `requested_by` records who initiated, so only the other party can
    accept a pending request.
    """

    a: str
    b: str
    status: FriendshipStatus = FriendshipStatus.PENDING
    share_mood_a_to_b: bool = True
    share_mood_b_to_a: bool = True
    requested_by: str = ""

    def __post_init__(self) -> None:
        validate_user_id(self.a)
        validate_user_id(self.b)
        if self.a == self.b:
            raise ValidationError("friendship endpoints must differ")
        if not isinstance(self.status, FriendshipStatus):
            object.__setattr__(self, "status", FriendshipStatus(self.status))
        if self.requested_by and self.requested_by not in (self.a, self.b):
            raise ValidationError("requested_by must be one of the endpoints")

    @property
    def pair(self) -> tuple[str, str]:
        return (self.a, self.b) if self.a <= self.b else (self.b, self.a)

    def shares_toward(self, viewer: str) -> bool:
        """True when the other endpoint shares mood toward `viewer`."""
        if viewer == self.a:
            return self.share_mood_b_to_a
        if viewer == self.b:
            return self.share_mood_a_to_b
        return False


def utc_now() -> datetime:
    return datetime.now(tz=timezone.utc)


__all__ = [
    "BigFive",
    "DEFAULT_STATE_LABELS",
    "Friendship",
    "FriendshipStatus",
    "Gender",
    "MoodInput",
    "MoodSource",
    "MoodState",
    "ParticipantProfile",
    "SensorSample",
    "WeatherObservation",
    "bucket_coord",
    "decode_mood_state",
    "encode_mood_state",
    "utc_now",
    "validate_user_id",
]

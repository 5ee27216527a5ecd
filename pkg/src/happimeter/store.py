"""Append-only event log with an in-memory snapshot.

Every mutation is one JSON line; the snapshot is a pure fold of the log,
so replaying a file always reconstructs the same state (hash-checked in
tests). Writes are serialized by a single lock, reads see plain dicts.
"""

from __future__ import annotations

import hashlib
import json
import threading
from pathlib import Path

from .csvio import format_ts, parse_ts
from .domain import (
    BigFive,
    Friendship,
    FriendshipStatus,
    Gender,
    MoodInput,
    MoodSource,
    ParticipantProfile,
    SensorSample,
    validate_user_id,
)
from .errors import NotFoundError, ValidationError


def _pair_key(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a <= b else (b, a)


class Store:
    """Event-sourced state: sensors, moods, profiles, friendships, prompts."""

    def __init__(self, path: str | Path | None = None):
        self._lock = threading.RLock()
        self._path = Path(path) if path is not None else None
        self._fh = None
        self._sensors: dict[str, dict[str, SensorSample]] = {}
        self._moods: dict[str, dict[str, MoodInput]] = {}
        self._profiles: dict[str, ParticipantProfile] = {}
        self._friendships: dict[tuple[str, str], Friendship] = {}
        self._answered: dict[str, set[str]] = {}
        if self._path is not None:
            if self._path.exists():
                for line_no, line in enumerate(self._path.read_text().splitlines(), 1):
                    if not line.strip():
                        continue
                    try:
                        event = json.loads(line)
                    except json.JSONDecodeError as exc:
                        raise ValidationError(
                            f"{self._path}:{line_no}: corrupt event log line"
                        ) from exc
                    self._apply(event)
            self._path.parent.mkdir(parents=True, exist_ok=True)
            self._fh = open(self._path, "a")

    def close(self) -> None:
        with self._lock:
            if self._fh is not None:
                self._fh.close()
                self._fh = None

    # -- event plumbing ----------------------------------------------------

    def _record(self, event: dict) -> None:
        with self._lock:
            self._apply(event)
            if self._fh is not None:
                self._fh.write(json.dumps(event, sort_keys=True, separators=(",", ":")))
                self._fh.write("\n")
                self._fh.flush()

    def _apply(self, event: dict) -> None:
        kind = event["type"]
        if kind == "sensor":
            s = SensorSample(
                user=event["user"],
                timestamp=parse_ts(event["ts"], "event log"),
                heart_rate=event["hr"],
                activity=event["activity"],
                vmc=event["vmc"],
                light_level=event["light"],
                latitude=event.get("lat"),
                longitude=event.get("lon"),
            )
            self._sensors.setdefault(s.user, {})[event["ts"]] = s
        elif kind == "mood":
            m = MoodInput(
                user=event["user"],
                timestamp=parse_ts(event["ts"], "event log"),
                pleasance=event["pleasance"],
                activation=event["activation"],
                source=MoodSource(event["source"]),
            )
            self._moods.setdefault(m.user, {})[event["ts"]] = m
        elif kind == "profile":
            b5 = event.get("big_five")
            p = ParticipantProfile(
                user=event["user"],
                age=event.get("age"),
                gender=Gender(event.get("gender", "unknown")),
                big_five=BigFive(**b5) if b5 else None,
                timezone=event.get("timezone", "UTC"),
            )
            self._profiles[p.user] = p
        elif kind == "friend_request":
            a, b = event["from"], event["to"]
            key = _pair_key(a, b)
            if key not in self._friendships:
                self._friendships[key] = Friendship(
                    a=key[0], b=key[1], status=FriendshipStatus.PENDING, requested_by=a
                )
        elif kind == "friend_accept":
            key = _pair_key(event["from"], event["to"])
            existing = self._friendships.get(key)
            if existing is not None and existing.status is FriendshipStatus.PENDING:
                self._friendships[key] = Friendship(
                    a=existing.a,
                    b=existing.b,
                    status=FriendshipStatus.ACCEPTED,
                    requested_by=existing.requested_by,
                    share_mood_a_to_b=existing.share_mood_a_to_b,
                    share_mood_b_to_a=existing.share_mood_b_to_a,
                )
        elif kind == "unfriend":
            self._friendships.pop(_pair_key(event["from"], event["to"]), None)
        elif kind == "set_sharing":
            key = _pair_key(event["from"], event["to"])
            existing = self._friendships.get(key)
            if existing is not None:
                share = bool(event["share"])
                if event["from"] == existing.a:
                    updated = Friendship(
                        a=existing.a, b=existing.b, status=existing.status,
                        requested_by=existing.requested_by,
                        share_mood_a_to_b=share,
                        share_mood_b_to_a=existing.share_mood_b_to_a,
                    )
                else:
                    updated = Friendship(
                        a=existing.a, b=existing.b, status=existing.status,
                        requested_by=existing.requested_by,
                        share_mood_a_to_b=existing.share_mood_a_to_b,
                        share_mood_b_to_a=share,
                    )
                self._friendships[key] = updated
        elif kind == "prompt_answered":
            self._answered.setdefault(event["user"], set()).add(event["prompt_id"])
        else:
            raise ValidationError(f"unknown event type {kind!r}")

    # -- writes --------------------------------------------------------------

    def append_sensor(self, sample: SensorSample) -> None:
        event = {
            "type": "sensor",
            "user": sample.user,
            "ts": format_ts(sample.timestamp),
            "hr": sample.heart_rate,
            "activity": sample.activity,
            "vmc": sample.vmc,
            "light": sample.light_level,
        }
        if sample.has_position:
            event["lat"] = sample.latitude
            event["lon"] = sample.longitude
        self._record(event)

    def append_mood(self, mood: MoodInput) -> None:
        self._record({
            "type": "mood",
            "user": mood.user,
            "ts": format_ts(mood.timestamp),
            "pleasance": mood.pleasance,
            "activation": mood.activation,
            "source": mood.source.value,
        })

    def upsert_profile(self, profile: ParticipantProfile) -> None:
        event: dict = {
            "type": "profile",
            "user": profile.user,
            "gender": profile.gender.value,
            "timezone": profile.timezone,
        }
        if profile.age is not None:
            event["age"] = profile.age
        if profile.big_five is not None:
            b5 = profile.big_five
            event["big_five"] = {
                "neuroticism": b5.neuroticism,
                "extraversion": b5.extraversion,
                "openness": b5.openness,
                "agreeableness": b5.agreeableness,
                "conscientiousness": b5.conscientiousness,
            }
        self._record(event)

    def request_friend(self, requester: str, target: str) -> Friendship:
        validate_user_id(requester)
        validate_user_id(target)
        if requester == target:
            raise ValidationError("cannot friend yourself")
        key = _pair_key(requester, target)
        with self._lock:
            existing = self._friendships.get(key)
            if existing is not None:
                return existing
            self._record({"type": "friend_request", "from": requester, "to": target})
            return self._friendships[key]

    def accept_friend(self, accepter: str, target: str) -> Friendship:
        if accepter == target:
            raise ValidationError("cannot friend yourself")
        key = _pair_key(accepter, target)
        with self._lock:
            existing = self._friendships.get(key)
            if existing is None or existing.status is not FriendshipStatus.PENDING:
                raise NotFoundError(f"no pending request between {accepter} and {target}")
            if existing.requested_by == accepter:
                raise ValidationError("the requester cannot accept their own request")
            self._record({"type": "friend_accept", "from": accepter, "to": target})
            return self._friendships[key]

    def unfriend(self, user: str, target: str) -> None:
        key = _pair_key(user, target)
        with self._lock:
            if key not in self._friendships:
                raise NotFoundError(f"no friendship between {user} and {target}")
            self._record({"type": "unfriend", "from": user, "to": target})

    def set_sharing(self, user: str, target: str, share: bool) -> Friendship:
        key = _pair_key(user, target)
        with self._lock:
            if key not in self._friendships:
                raise NotFoundError(f"no friendship between {user} and {target}")
            self._record({
                "type": "set_sharing", "from": user, "to": target, "share": share,
            })
            return self._friendships[key]

    def mark_answered(self, user: str, prompt_id: str) -> None:
        self._record({"type": "prompt_answered", "user": user, "prompt_id": prompt_id})

    # -- reads ---------------------------------------------------------------

    def sensors_for(self, user: str) -> list[SensorSample]:
        with self._lock:
            by_ts = self._sensors.get(user, {})
            return [by_ts[k] for k in sorted(by_ts)]

    def moods_for(self, user: str) -> list[MoodInput]:
        with self._lock:
            by_ts = self._moods.get(user, {})
            return [by_ts[k] for k in sorted(by_ts)]

    def profile_for(self, user: str) -> ParticipantProfile | None:
        with self._lock:
            return self._profiles.get(user)

    def profiles(self) -> dict[str, ParticipantProfile]:
        with self._lock:
            return dict(self._profiles)

    def friendship_between(self, a: str, b: str) -> Friendship | None:
        with self._lock:
            return self._friendships.get(_pair_key(a, b))

    def friendships_of(self, user: str) -> list[Friendship]:
        with self._lock:
            return [f for f in self._friendships.values() if user in f.pair]

    def visible_friends(self, viewer: str) -> list[str]:
        """Accepted friends who currently share their mood toward viewer."""
        out = []
        for f in self.friendships_of(viewer):
            if f.status is FriendshipStatus.ACCEPTED and f.shares_toward(viewer):
                other = f.b if f.a == viewer else f.a
                out.append(other)
        return sorted(out)

    def answered_prompts(self, user: str) -> frozenset[str]:
        with self._lock:
            return frozenset(self._answered.get(user, set()))

    def users(self) -> list[str]:
        with self._lock:
            seen = set(self._sensors) | set(self._moods) | set(self._profiles)
            return sorted(seen)

    # -- determinism ---------------------------------------------------------

    def snapshot_hash(self) -> str:
        """Stable digest of the folded state, for replay verification."""
        with self._lock:
            state = {
                "sensors": {
                    u: [
                        [
                            ts, s.heart_rate, s.activity, s.vmc, s.light_level,
                            s.latitude, s.longitude,
                        ]
                        for ts, s in sorted(self._sensors[u].items())
                    ]
                    for u in sorted(self._sensors)
                },
                "moods": {
                    u: [
                        [ts, m.pleasance, m.activation, m.source.value]
                        for ts, m in sorted(self._moods[u].items())
                    ]
                    for u in sorted(self._moods)
                },
                "profiles": {
                    u: [
                        p.age,
                        p.gender.value,
                        [
                            p.big_five.neuroticism,
                            p.big_five.extraversion,
                            p.big_five.openness,
                            p.big_five.agreeableness,
                            p.big_five.conscientiousness,
                        ]
                        if p.big_five
                        else None,
                        p.timezone,
                    ]
                    for u, p in sorted(self._profiles.items())
                },
                "friendships": {
                    f"{k[0]}|{k[1]}": [
                        f.status.value, f.requested_by,
                        f.share_mood_a_to_b, f.share_mood_b_to_a,
                    ]
                    for k, f in sorted(self._friendships.items())
                },
                "answered": {u: sorted(v) for u, v in sorted(self._answered.items())},
            }
        blob = json.dumps(state, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

"""Experience-sampling prompt scheduler.

Prompts are drawn uniformly inside the user's awake window with a
minimum spacing between consecutive prompts, using the standard trick of
shrinking the window by the total gap budget, drawing sorted offsets,
then re-inflating. Schedules are a pure function of (user, date, seed).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from datetime import date, datetime, time, timedelta

import numpy as np

from .errors import SchedulingError, ValidationError
from .features import resolve_zone


@dataclass(frozen=True)
class SamplingConfig:
    prompts_per_day: int = 4
    awake_start: time = time(8, 0)
    awake_end: time = time(22, 0)
    min_gap: timedelta = timedelta(minutes=90)
    expiry: timedelta = timedelta(minutes=60)

    def __post_init__(self) -> None:
        if self.prompts_per_day < 1:
            raise ValidationError("prompts_per_day must be >= 1")
        if self.awake_end <= self.awake_start:
            raise ValidationError("awake window must end after it starts")
        if self.min_gap < timedelta(0) or self.expiry <= timedelta(0):
            raise ValidationError("min_gap must be >= 0 and expiry > 0")


@dataclass(frozen=True)
class Prompt:
    prompt_id: str
    fire_at: datetime
    expires_at: datetime


@dataclass(frozen=True)
class PromptSchedule:
    user: str
    day: date
    zone_id: str
    prompts: tuple[Prompt, ...]


def _schedule_rng(user: str, day: date, seed: int) -> np.random.Generator:
    digest = hashlib.sha256(f"schedule:{seed}:{user}:{day.isoformat()}".encode()).digest()
    return np.random.default_rng(int.from_bytes(digest[:8], "big"))


def generate_schedule(
    user: str,
    day: date,
    zone_id: str,
    seed: int,
    cfg: SamplingConfig = SamplingConfig(),
) -> PromptSchedule:
    """Lay out the day's prompts; same arguments always give the same times."""
    zone = resolve_zone(zone_id)
    start = datetime.combine(day, cfg.awake_start, tzinfo=zone)
    end = datetime.combine(day, cfg.awake_end, tzinfo=zone)

    n = cfg.prompts_per_day
    window_s = int((end - start).total_seconds())
    gap_s = int(cfg.min_gap.total_seconds())
    shrunk = window_s - (n - 1) * gap_s
    if shrunk < n:
        raise SchedulingError(
            f"awake window of {window_s}s cannot fit {n} prompts "
            f"with {gap_s}s spacing"
        )

    rng = _schedule_rng(user, day, seed)
    offsets = np.sort(rng.integers(0, shrunk, size=n))
    prompts = []
    for i, off in enumerate(offsets):
        fire_at = start + timedelta(seconds=int(off) + i * gap_s)
        prompts.append(
            Prompt(
                prompt_id=f"{day.isoformat()}#{i}",
                fire_at=fire_at,
                expires_at=fire_at + cfg.expiry,
            )
        )
    return PromptSchedule(user=user, day=day, zone_id=zone_id, prompts=tuple(prompts))


def due_prompt(
    schedule: PromptSchedule,
    now: datetime,
    answered: set[str] | frozenset[str] = frozenset(),
) -> Prompt | None:
    """Earliest unanswered prompt whose [fire_at, expires_at) covers now."""
    for prompt in schedule.prompts:
        if prompt.prompt_id in answered:
            continue
        if prompt.fire_at <= now < prompt.expires_at:
            return prompt
    return None

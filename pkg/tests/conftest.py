from __future__ import annotations

import sys
from datetime import datetime, timezone
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from happimeter.domain import SensorSample


def ts(text: str) -> datetime:
    """Shorthand UTC timestamp for fixtures: ts("2017-05-03 12:00")."""
    return datetime.strptime(text, "%Y-%m-%d %H:%M").replace(tzinfo=timezone.utc)


def make_sample(user="u01", at="2017-05-03 12:00", hr=70.0, activity=2,
                vmc=100.0, light=3, lat=48.0, lon=11.5) -> SensorSample:
    return SensorSample(
        user=user,
        timestamp=ts(at) if isinstance(at, str) else at,
        heart_rate=hr,
        activity=activity,
        vmc=vmc,
        light_level=light,
        latitude=lat,
        longitude=lon,
    )


@pytest.fixture
def utc_noon() -> datetime:
    return ts("2017-05-03 12:00")

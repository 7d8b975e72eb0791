"""Clock arithmetic, time buckets, and the popularity-driven dwell model."""

from __future__ import annotations

import enum
from dataclasses import dataclass

MINUTES_PER_DAY = 1440


@dataclass(frozen=True, order=True)
class ClockTime:
    """A time of day as minutes since midnight. Arithmetic wraps at midnight."""

    minute_of_day: int

    def __post_init__(self):
        if not 0 <= self.minute_of_day < MINUTES_PER_DAY:
            raise ValueError(f"minute_of_day {self.minute_of_day} outside 0..1439")

    @classmethod
    def parse(cls, text: str) -> "ClockTime":
        parts = text.split(":")
        if len(parts) != 2:
            raise ValueError(f"bad clock time {text!r}, expected HH:MM")
        try:
            hh, mm = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValueError(f"bad clock time {text!r}, expected HH:MM") from None
        if not (0 <= hh < 24 and 0 <= mm < 60):
            raise ValueError(f"bad clock time {text!r}, expected HH:MM")
        return cls(hh * 60 + mm)

    @classmethod
    def from_minute(cls, minute: int) -> "ClockTime":
        return cls(int(minute) % MINUTES_PER_DAY)

    def add(self, minutes: float) -> "ClockTime":
        return ClockTime.from_minute(int(round(self.minute_of_day + minutes)) % MINUTES_PER_DAY)

    @property
    def hour(self) -> int:
        return self.minute_of_day // 60

    def __str__(self) -> str:
        return f"{self.minute_of_day // 60:02d}:{self.minute_of_day % 60:02d}"


class Bucket(enum.Enum):
    """The four representative traffic buckets a drive-time matrix is stored at."""

    B00 = 0
    B09 = 1
    B12 = 2
    B18 = 3

    @property
    def anchor_minute(self) -> int:
        return {Bucket.B00: 0, Bucket.B09: 540, Bucket.B12: 720, Bucket.B18: 1080}[self]

    @property
    def label(self) -> str:
        return {Bucket.B00: "00:00", Bucket.B09: "09:00", Bucket.B12: "12:00", Bucket.B18: "18:00"}[self]


BUCKETS = (Bucket.B00, Bucket.B09, Bucket.B12, Bucket.B18)
BUCKET_LABELS = tuple(b.label for b in BUCKETS)


def bucket_of(t: ClockTime) -> Bucket:
    """Map a clock time to its traffic bucket.

    Windows are half-open and chosen so each bucket anchor falls inside its
    own window: [06:00,10:30) -> B09, [10:30,15:00) -> B12,
    [15:00,21:00) -> B18, everything else -> B00.
    """
    m = t.minute_of_day
    if 360 <= m < 630:
        return Bucket.B09
    if 630 <= m < 900:
        return Bucket.B12
    if 900 <= m < 1260:
        return Bucket.B18
    return Bucket.B00


def popularity_at(poi, t: ClockTime) -> int:
    """Crowd level 0..100 at time t; constant within each hour."""
    return poi.popularity[t.hour]


def dwell_minutes(poi, t: ClockTime, override: float | None = None) -> float:
    """Minutes spent at a stop when arriving at time t.

    A user-specified override short-circuits the model entirely. Otherwise
    the category base time is stretched by the crowd level: base * (1 + p/100).
    Stops without a base time (homes, workplaces) take zero minutes.
    """
    if override is not None:
        return float(override)
    if poi.base_dwell is None:
        return 0.0
    return poi.base_dwell * (1.0 + popularity_at(poi, t) / 100.0)

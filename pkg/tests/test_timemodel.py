import random

import pytest

from topkit.timemodel import Bucket, ClockTime, bucket_of, dwell_minutes, popularity_at
from topkit.worldmodel import Poi


def make_poi(category="cafe", base_dwell=5, popularity=None):
    return Poi(
        id=0,
        name="T Cafe",
        category=category,
        x=0.0,
        y=0.0,
        brand=None,
        price_level=1,
        open_minute=0,
        close_minute=1440,
        base_dwell=base_dwell,
        popularity=popularity if popularity is not None else [0] * 24,
    )


def test_clock_parse_and_format():
    t = ClockTime.parse("09:30")
    assert t.minute_of_day == 570
    assert str(t) == "09:30"
    assert ClockTime.parse("00:00").minute_of_day == 0


def test_clock_rejects_garbage():
    for bad in ("24:00", "9:70", "noon", "12", "12:3:4"):
        with pytest.raises(ValueError):
            ClockTime.parse(bad)
    with pytest.raises(ValueError):
        ClockTime(1440)


def test_clock_wraps_past_midnight():
    t = ClockTime.parse("23:50").add(30)
    assert str(t) == "00:20"


def test_bucket_anchors_map_to_own_bucket():
    assert bucket_of(ClockTime.parse("00:00")) is Bucket.B00
    assert bucket_of(ClockTime.parse("09:00")) is Bucket.B09
    assert bucket_of(ClockTime.parse("12:00")) is Bucket.B12
    assert bucket_of(ClockTime.parse("18:00")) is Bucket.B18


def test_bucket_boundaries_are_half_open():
    assert bucket_of(ClockTime.parse("06:00")) is Bucket.B09
    assert bucket_of(ClockTime.parse("10:29")) is Bucket.B09
    assert bucket_of(ClockTime.parse("10:30")) is Bucket.B12
    assert bucket_of(ClockTime.parse("15:00")) is Bucket.B18
    assert bucket_of(ClockTime.parse("21:00")) is Bucket.B00
    assert bucket_of(ClockTime.parse("23:59")) is Bucket.B00


def test_bucket_preimages_partition_the_day():
    counts = {b: 0 for b in Bucket}
    for minute in range(1440):
        counts[bucket_of(ClockTime(minute))] += 1
    assert sum(counts.values()) == 1440
    assert counts[Bucket.B09] == 270
    assert counts[Bucket.B12] == 270
    assert counts[Bucket.B18] == 360
    assert counts[Bucket.B00] == 540


def test_popularity_is_hourly_step_function():
    pop = [0] * 24
    pop[12] = 80
    pop[13] = 40
    poi = make_poi(popularity=pop)
    assert popularity_at(poi, ClockTime.parse("12:30")) == 80
    assert popularity_at(poi, ClockTime.parse("12:00")) == popularity_at(poi, ClockTime.parse("12:59"))
    assert popularity_at(poi, ClockTime.parse("13:00")) == 40


def test_dwell_base_time_when_not_busy():
    poi = make_poi(category="charging", base_dwell=30)
    assert dwell_minutes(poi, ClockTime.parse("03:00")) == 30.0


def test_dwell_scales_with_crowd():
    poi = make_poi(category="charging", base_dwell=30, popularity=[50] * 24)
    assert dwell_minutes(poi, ClockTime.parse("12:00")) == 45.0


def test_override_short_circuits_model():
    poi = make_poi(category="restaurant", base_dwell=60, popularity=[90] * 24)
    assert dwell_minutes(poi, ClockTime.parse("12:00"), override=20) == 20.0


def test_no_base_dwell_means_zero():
    poi = make_poi(category="apartment", base_dwell=None)
    assert dwell_minutes(poi, ClockTime.parse("08:00")) == 0.0


def test_dwell_monotone_in_popularity():
    rng = random.Random(11)
    for _ in range(50):
        base = rng.randint(1, 120)
        p1, p2 = sorted((rng.randint(0, 100), rng.randint(0, 100)))
        lo = dwell_minutes(make_poi(base_dwell=base, popularity=[p1] * 24), ClockTime(600))
        hi = dwell_minutes(make_poi(base_dwell=base, popularity=[p2] * 24), ClockTime(600))
        assert lo <= hi


def test_override_is_time_independent():
    pop = list(range(24))
    poi = make_poi(base_dwell=25, popularity=[min(p * 4, 100) for p in pop])
    values = {dwell_minutes(poi, ClockTime(h * 60), override=15) for h in range(24)}
    assert values == {15.0}

"""The synthetic city: POIs, bucketed travel matrices, generation, persistence.

Everything is derived deterministically from a 64-bit seed and a generation
config, so two runs with the same inputs produce byte-identical map files.
"""

from __future__ import annotations

import math
import random
import string
from dataclasses import dataclass, field, replace

from .jsonio import dump_json, load_json
from .timemodel import BUCKET_LABELS, BUCKETS, Bucket

CATEGORIES = ("apartment", "company", "charging", "cafe", "gym", "market", "restaurant")

# Category base stay times in minutes; homes and workplaces have none.
BASE_DWELL_MIN = {
    "apartment": None,
    "company": None,
    "charging": 30,
    "cafe": 5,
    "gym": 25,
    "market": 20,
    "restaurant": 60,
}

DEFAULT_CATEGORY_COUNTS = {
    "apartment": 6,
    "company": 5,
    "charging": 6,
    "cafe": 9,
    "gym": 6,
    "market": 7,
    "restaurant": 11,
}

# Hourly crowd profiles (24 values, 0..100) before per-POI jitter.
POPULARITY_PROFILES = {
    "apartment": [0] * 24,
    "company": [0] * 24,
    "charging": [20] * 24,
    "cafe": [0, 0, 0, 0, 0, 5, 25, 55, 75, 80, 70, 55, 45, 40, 35, 30, 30, 35, 30, 20, 10, 5, 0, 0],
    "gym": [5, 0, 0, 0, 0, 10, 50, 80, 60, 40, 30, 30, 35, 35, 30, 35, 45, 60, 75, 80, 70, 50, 30, 10],
    "market": [0, 0, 0, 0, 0, 0, 5, 10, 20, 25, 30, 35, 40, 40, 35, 45, 60, 80, 70, 50, 30, 15, 5, 0],
    "restaurant": [0, 0, 0, 0, 0, 0, 5, 10, 15, 20, 30, 60, 85, 70, 40, 30, 45, 70, 85, 70, 50, 30, 15, 5],
}

NAME_SUFFIX = {
    "apartment": "Apartment",
    "company": "Office",
    "charging": "Charging Station",
    "cafe": "Cafe",
    "gym": "Gym",
    "market": "Market",
    "restaurant": "Restaurant",
}


class MapFormatError(ValueError):
    """A map file that cannot be parsed against the schema."""


class MapValidationError(ValueError):
    """A structurally parseable map that violates an invariant."""


@dataclass
class GenerationConfig:
    category_counts: dict = field(default_factory=lambda: dict(DEFAULT_CATEGORY_COUNTS))
    extent_km: float = 10.0
    circuity: float = 1.3
    # km/h per bucket; free flow at night, slowest in the evening rush
    speeds_kmh: dict = field(
        default_factory=lambda: {Bucket.B00: 34.0, Bucket.B09: 22.0, Bucket.B12: 28.0, Bucket.B18: 20.0}
    )
    walk_speed_kmh: float = 4.8
    drive_jitter: tuple = (0.9, 1.1)
    popularity_jitter: int = 10
    brands: dict = field(
        default_factory=lambda: {
            "charging": ["VoltHub", "Ampora", "ChargeLine"],
            "cafe": ["Bean Scene", "Daily Grind", "Mocha Mornings"],
        }
    )
    # minutes since midnight; (0, 1440) means always open
    opening_hours: dict = field(
        default_factory=lambda: {
            "apartment": (0, 1440),
            "company": (0, 1440),
            "charging": (0, 1440),
            "cafe": (420, 1260),
            "gym": (360, 1380),
            "market": (480, 1320),
            "restaurant": (600, 1380),
        }
    )
    exclusions: tuple = (("charging", "gas"),)

    def validate(self) -> None:
        for cat, n in self.category_counts.items():
            if cat not in CATEGORIES:
                raise ValueError(f"unknown category {cat!r} in config")
            if n <= 0:
                raise ValueError(f"category count for {cat!r} must be positive, got {n}")
        if self.extent_km <= 0:
            raise ValueError(f"extent_km must be positive, got {self.extent_km}")
        for cat, profile in POPULARITY_PROFILES.items():
            assert len(profile) == 24, cat

    @classmethod
    def from_dict(cls, data: dict) -> "GenerationConfig":
        cfg = cls()
        if "category_counts" in data:
            counts = dict(cfg.category_counts)
            counts.update({str(k): int(v) for k, v in data["category_counts"].items()})
            cfg = replace(cfg, category_counts=counts)
        if "extent_km" in data:
            cfg = replace(cfg, extent_km=float(data["extent_km"]))
        if "brands" in data:
            brands = dict(cfg.brands)
            brands.update({str(k): list(v) for k, v in data["brands"].items()})
            cfg = replace(cfg, brands=brands)
        if "opening_hours" in data:
            hours = dict(cfg.opening_hours)
            hours.update({str(k): (int(v[0]), int(v[1])) for k, v in data["opening_hours"].items()})
            cfg = replace(cfg, opening_hours=hours)
        if "exclusions" in data:
            cfg = replace(cfg, exclusions=tuple(tuple(sorted(map(str, pair))) for pair in data["exclusions"]))
        return cfg


@dataclass
class Poi:
    id: int
    name: str
    category: str
    x: float
    y: float
    brand: str | None
    price_level: int
    open_minute: int
    close_minute: int
    base_dwell: int | None
    popularity: list

    @property
    def always_open(self) -> bool:
        return self.open_minute == 0 and self.close_minute == 1440


@dataclass
class TravelMatrix:
    drive_minutes: list  # [4 buckets][N][N] integer minutes
    walk_minutes: list  # [N][N] integer minutes
    distance_km: list  # [N][N] km, one decimal


@dataclass
class WorldMap:
    pois: list
    matrix: TravelMatrix
    seed: int
    exclusions: tuple

    def __post_init__(self):
        self._by_name = {p.name: p for p in self.pois}
        self._by_category: dict = {}
        for p in self.pois:
            self._by_category.setdefault(p.category, []).append(p.id)

    def __eq__(self, other):
        if not isinstance(other, WorldMap):
            return NotImplemented
        return (
            self.pois == other.pois
            and self.matrix == other.matrix
            and self.seed == other.seed
            and self.exclusions == other.exclusions
        )

    def poi(self, poi_id: int) -> Poi:
        if not isinstance(poi_id, int) or not 0 <= poi_id < len(self.pois):
            raise KeyError(f"unknown poi id {poi_id!r}")
        return self.pois[poi_id]

    def poi_by_name(self, name: str) -> Poi:
        try:
            return self._by_name[name]
        except KeyError:
            raise KeyError(f"unknown poi name {name!r}") from None

    def ids_of_category(self, category: str) -> list:
        return list(self._by_category.get(category, []))

    def drive_minutes(self, bucket: Bucket, a: int, b: int) -> int:
        return self.matrix.drive_minutes[bucket.value][a][b]

    def walk_minutes(self, a: int, b: int) -> int:
        return self.matrix.walk_minutes[a][b]

    def is_excluded_pair(self, cat_a: str, cat_b: str) -> bool:
        return tuple(sorted((cat_a, cat_b))) in self.exclusions


def distance_km(world: WorldMap, from_id: int, to_id: int) -> float:
    """Pairwise driving distance between two POIs in kilometers."""
    world.poi(from_id)
    world.poi(to_id)
    return world.matrix.distance_km[from_id][to_id]


def _draw_code(rng: random.Random, used: set) -> str:
    while True:
        code = rng.choice(string.ascii_uppercase) + rng.choice(string.ascii_uppercase)
        if code not in used:
            used.add(code)
            return code


def generate_map(seed: int, config: GenerationConfig | None = None) -> WorldMap:
    """Build the whole synthetic city from a seed.

    Coordinates are uniform in an extent x extent square; distances are
    Euclidean scaled by a circuity factor and rounded to 0.1 km; drive
    minutes divide distance by the bucket speed with one symmetric per-edge
    jitter reused across buckets, which keeps rush-hour times entrywise
    above free flow.
    """
    config = config or GenerationConfig()
    config.validate()
    rng = random.Random(seed)

    pois = []
    used_codes: set = set()
    next_id = 0
    for category in CATEGORIES:
        count = config.category_counts.get(category, 0)
        brands = config.brands.get(category)
        open_m, close_m = config.opening_hours[category]
        profile = POPULARITY_PROFILES[category]
        for k in range(count):
            code = _draw_code(rng, used_codes)
            x = round(rng.uniform(0.0, config.extent_km), 3)
            y = round(rng.uniform(0.0, config.extent_km), 3)
            price = rng.randint(1, 3)
            jitter = rng.randint(-config.popularity_jitter, config.popularity_jitter)
            popularity = [min(100, max(0, v + jitter)) for v in profile]
            pois.append(
                Poi(
                    id=next_id,
                    name=f"{code} {NAME_SUFFIX[category]}",
                    category=category,
                    x=x,
                    y=y,
                    brand=brands[k % len(brands)] if brands else None,
                    price_level=price,
                    open_minute=open_m,
                    close_minute=close_m,
                    base_dwell=BASE_DWELL_MIN[category],
                    popularity=popularity,
                )
            )
            next_id += 1

    n = len(pois)
    lo, hi = config.drive_jitter
    edge_jitter = [[1.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            edge_jitter[i][j] = edge_jitter[j][i] = rng.uniform(lo, hi)

    dist = [[0.0] * n for _ in range(n)]
    walk = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            eucl = math.hypot(pois[i].x - pois[j].x, pois[i].y - pois[j].y)
            dist[i][j] = round(eucl * config.circuity, 1)
            walk[i][j] = round(eucl / config.walk_speed_kmh * 60.0)

    drive = []
    for bucket in BUCKETS:
        speed = config.speeds_kmh[bucket]
        layer = [[0] * n for _ in range(n)]
        for i in range(n):
            for j in range(n):
                if i != j:
                    layer[i][j] = round(dist[i][j] / speed * 60.0 * edge_jitter[i][j])
        drive.append(layer)

    return WorldMap(
        pois=pois,
        matrix=TravelMatrix(drive_minutes=drive, walk_minutes=walk, distance_km=dist),
        seed=seed,
        exclusions=tuple(tuple(sorted(pair)) for pair in config.exclusions),
    )


def save_map(world: WorldMap, path) -> None:
    payload = {
        "seed": world.seed,
        "pois": [
            {
                "id": p.id,
                "name": p.name,
                "category": p.category,
                "x_km": p.x,
                "y_km": p.y,
                "brand": p.brand,
                "price_level": p.price_level,
                "open_minute": p.open_minute,
                "close_minute": p.close_minute,
                "base_dwell_min": p.base_dwell,
                "popularity": p.popularity,
            }
            for p in world.pois
        ],
        "buckets": list(BUCKET_LABELS),
        "drive_minutes": world.matrix.drive_minutes,
        "walk_minutes": world.matrix.walk_minutes,
        "distance_km": world.matrix.distance_km,
        "exclusions": [list(pair) for pair in world.exclusions],
    }
    dump_json(payload, path)


def _require(data: dict, key: str, context: str):
    if key not in data:
        raise MapFormatError(f"{context}: missing field {key!r}")
    return data[key]


def load_map(path) -> WorldMap:
    try:
        data = load_json(path)
    except ValueError as exc:
        raise MapFormatError(str(exc)) from None
    if not isinstance(data, dict):
        raise MapFormatError(f"{path}: expected a JSON object at top level")

    seed = _require(data, "seed", "map")
    raw_pois = _require(data, "pois", "map")
    buckets = _require(data, "buckets", "map")
    drive = _require(data, "drive_minutes", "map")
    walk = _require(data, "walk_minutes", "map")
    dist = _require(data, "distance_km", "map")
    exclusions = _require(data, "exclusions", "map")

    if list(buckets) != list(BUCKET_LABELS):
        raise MapFormatError(f"map: buckets must be {list(BUCKET_LABELS)}, got {buckets}")

    pois = []
    for idx, rp in enumerate(raw_pois):
        ctx = f"pois[{idx}]"
        poi = Poi(
            id=_require(rp, "id", ctx),
            name=_require(rp, "name", ctx),
            category=_require(rp, "category", ctx),
            x=_require(rp, "x_km", ctx),
            y=_require(rp, "y_km", ctx),
            brand=_require(rp, "brand", ctx),
            price_level=_require(rp, "price_level", ctx),
            open_minute=_require(rp, "open_minute", ctx),
            close_minute=_require(rp, "close_minute", ctx),
            base_dwell=_require(rp, "base_dwell_min", ctx),
            popularity=_require(rp, "popularity", ctx),
        )
        pois.append(poi)

    world = WorldMap(
        pois=pois,
        matrix=TravelMatrix(drive_minutes=drive, walk_minutes=walk, distance_km=dist),
        seed=seed,
        exclusions=tuple(tuple(sorted(pair)) for pair in exclusions),
    )
    validate_map(world)
    return world


def validate_map(world: WorldMap) -> None:
    """Check every map invariant; raises MapValidationError naming the culprit."""
    n = len(world.pois)
    names = set()
    for idx, p in enumerate(world.pois):
        ctx = f"pois[{idx}]"
        if p.id != idx:
            raise MapValidationError(f"{ctx}.id: ids must be dense 0..N-1, got {p.id}")
        if p.name in names:
            raise MapValidationError(f"{ctx}.name: duplicate name {p.name!r}")
        names.add(p.name)
        if p.category not in CATEGORIES:
            raise MapValidationError(f"{ctx}.category: unknown category {p.category!r}")
        expected_dwell = BASE_DWELL_MIN[p.category]
        if p.base_dwell != expected_dwell:
            raise MapValidationError(
                f"{ctx}.base_dwell_min: category {p.category!r} requires {expected_dwell}, got {p.base_dwell}"
            )
        if not isinstance(p.price_level, int) or not 1 <= p.price_level <= 3:
            raise MapValidationError(f"{ctx}.price_level: must be an integer 1..3, got {p.price_level!r}")
        if not 0 <= p.open_minute <= 1440 or not 0 <= p.close_minute <= 1440:
            raise MapValidationError(f"{ctx}: opening hours outside 0..1440")
        if len(p.popularity) != 24:
            raise MapValidationError(f"{ctx}.popularity: expected 24 entries, got {len(p.popularity)}")
        for h, v in enumerate(p.popularity):
            if not isinstance(v, int) or not 0 <= v <= 100:
                raise MapValidationError(f"{ctx}.popularity[{h}]: value {v!r} outside [0,100]")

    m = world.matrix
    if len(m.drive_minutes) != len(BUCKETS):
        raise MapValidationError(f"drive_minutes: expected {len(BUCKETS)} buckets, got {len(m.drive_minutes)}")
    for b, layer in enumerate(m.drive_minutes):
        _check_square(layer, n, f"drive_minutes[{b}]")
    _check_square(m.walk_minutes, n, "walk_minutes")
    _check_square(m.distance_km, n, "distance_km")

    free = m.drive_minutes[Bucket.B00.value]
    for rush in (Bucket.B09, Bucket.B18):
        layer = m.drive_minutes[rush.value]
        for i in range(n):
            for j in range(n):
                if layer[i][j] < free[i][j]:
                    raise MapValidationError(
                        f"drive_minutes[{rush.value}][{i}][{j}]: rush time {layer[i][j]} "
                        f"below free-flow {free[i][j]}"
                    )
    for i in range(n):
        for j in range(n):
            if m.distance_km[i][j] > 0.5 and m.walk_minutes[i][j] < free[i][j]:
                raise MapValidationError(
                    f"walk_minutes[{i}][{j}]: {m.walk_minutes[i][j]} below free-flow drive {free[i][j]}"
                )


def _check_square(matrix, n: int, name: str) -> None:
    if len(matrix) != n:
        raise MapValidationError(f"{name}: expected {n} rows, got {len(matrix)}")
    for i, row in enumerate(matrix):
        if len(row) != n:
            raise MapValidationError(f"{name}[{i}]: expected {n} columns, got {len(row)}")
        for j, v in enumerate(row):
            if v < 0:
                raise MapValidationError(f"{name}[{i}][{j}]: negative value {v}")
        if row[i] != 0:
            raise MapValidationError(f"{name}[{i}][{i}]: diagonal must be zero, got {row[i]}")

import pytest

from topkit.worldmodel import BASE_DWELL_MIN, Poi, TravelMatrix, WorldMap, generate_map


@pytest.fixture(scope="session")
def world():
    return generate_map(7)


def build_world(specs, drive, walk=None, dist=None, exclusions=(("charging", "gas"),), seed=0):
    """Hand-built toy map for targeted solver tests.

    specs: one dict per POI: {"category", optional "name", "x", "y", "brand",
    "price_level", "hours" (open, close), "popularity" (24 ints)}. drive is
    an NxN minute matrix reused for all four buckets, or a [4][N][N] stack.
    """
    pois = []
    for i, s in enumerate(specs):
        cat = s["category"]
        open_m, close_m = s.get("hours", (0, 1440))
        pois.append(
            Poi(
                id=i,
                name=s.get("name", f"T{i} {cat}"),
                category=cat,
                x=float(s.get("x", 0.0)),
                y=float(s.get("y", 0.0)),
                brand=s.get("brand"),
                price_level=s.get("price_level", 1),
                open_minute=open_m,
                close_minute=close_m,
                base_dwell=BASE_DWELL_MIN[cat],
                popularity=list(s.get("popularity", [0] * 24)),
            )
        )
    n = len(specs)
    if drive and isinstance(drive[0][0], list):
        layers = [[row[:] for row in layer] for layer in drive]
    else:
        layers = [[row[:] for row in drive] for _ in range(4)]
    if walk is None:
        walk = [[0] * n for _ in range(n)]
    if dist is None:
        dist = [[0.0 if i == j else 1.0 for j in range(n)] for i in range(n)]
    return WorldMap(
        pois=pois,
        matrix=TravelMatrix(drive_minutes=layers, walk_minutes=walk, distance_km=dist),
        seed=seed,
        exclusions=tuple(tuple(sorted(pair)) for pair in exclusions),
    )


def hand_simulate(world, stops, depart_minute):
    """Independent forward simulation used as the oracle for evaluate_plan.

    Assumes a dwell-free origin and no dwell overrides, which is how the
    test itineraries are constructed.
    """
    def bucket(minute):
        m = minute % 1440
        if 360 <= m < 630:
            return 1
        if 630 <= m < 900:
            return 2
        if 900 <= m < 1260:
            return 3
        return 0

    t = float(depart_minute)
    total = 0.0
    for a, b in zip(stops, stops[1:]):
        travel = world.matrix.drive_minutes[bucket(t)][a][b]
        t += travel
        total += travel
        if b != stops[-1]:
            poi = world.poi(b)
            dwell = poi.base_dwell * (1.0 + poi.popularity[int(t % 1440) // 60] / 100.0)
            t += dwell
            total += dwell
    return total

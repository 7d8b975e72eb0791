import itertools

import pytest

from topkit.solver import (
    Itinerary,
    QuerySpec,
    apply_charge_absorption,
    best_departure,
    best_insertion,
    brute_force_oracle,
    check_feasibility,
    compare_routes,
    evaluate_plan,
    nearest_poi,
    solve_optimal,
)
from topkit.timemodel import ClockTime

from conftest import build_world, hand_simulate


def two_stop_world(minutes=17):
    return build_world(
        [{"category": "apartment"}, {"category": "company"}],
        drive=[[0, minutes], [minutes, 0]],
    )


def cafe_world():
    # apartment -> cafe (base 5, p=0) -> company
    return build_world(
        [
            {"category": "apartment"},
            {"category": "cafe"},
            {"category": "company"},
        ],
        drive=[[0, 10, 20], [10, 0, 12], [20, 12, 0]],
    )


def absorption_world(cafe_popularity=20, walk_min=5):
    # ids: 0 apartment, 1 charging, 2 cafe, 3 company
    drive = [
        [0, 10, 9, 25],
        [10, 0, 4, 14],
        [9, 4, 0, 12],
        [25, 14, 12, 0],
    ]
    walk = [[0] * 4 for _ in range(4)]
    walk[1][2] = walk[2][1] = walk_min
    return build_world(
        [
            {"category": "apartment"},
            {"category": "charging"},
            {"category": "cafe", "popularity": [cafe_popularity] * 24},
            {"category": "company"},
        ],
        drive=drive,
        walk=walk,
    )


# ----------------------------------------------------------- evaluate_plan

def test_two_stop_plan_is_pure_drive():
    w = two_stop_world(17)
    plan = evaluate_plan(w, Itinerary((0, 1), "08:00"))
    assert plan.total_min == 17.0
    assert plan.feasible
    assert len(plan.legs) == 1


def test_intermediate_dwell_added():
    w = cafe_world()
    plan = evaluate_plan(w, Itinerary((0, 1, 2), "08:00"))
    assert plan.total_min == 10 + 5 + 12


def test_destination_dwell_excluded():
    w = cafe_world()
    plan = evaluate_plan(w, Itinerary((0, 2, 1), "08:00"))
    # cafe is the final stop here, so its dwell does not count
    assert plan.total_min == 20 + 12


def test_seed7_plan_matches_hand_simulation(world):
    stops = (0, 17, 26, 32, 6)  # apartment, cafe, gym, market, company
    expected = hand_simulate(world, stops, 11 * 60)
    plan = evaluate_plan(world, Itinerary(stops, "11:00"))
    assert plan.total_min == expected
    assert plan.total_min == 111.9


def test_leg_bucket_follows_departure_instant(world):
    # first leg leaves at 10:25 (morning bucket), later legs shift buckets
    stops = (1, 39, 7)
    plan = evaluate_plan(world, Itinerary(stops, "10:25"))
    assert plan.legs[0].travel_min == world.matrix.drive_minutes[1][1][39]
    expected = hand_simulate(world, stops, 10 * 60 + 25)
    assert plan.total_min == expected


def test_legs_chain_with_integer_dwells():
    w = cafe_world()
    plan = evaluate_plan(w, Itinerary((0, 1, 2), "09:00"))
    first, second = plan.legs
    assert second.depart.minute_of_day == first.arrive.minute_of_day + int(first.dwell_min)


def test_duplicate_stop_rejected():
    with pytest.raises(ValueError, match="repeated stop"):
        Itinerary((0, 1, 0), "09:00")


def test_unknown_stop_rejected(world):
    with pytest.raises(KeyError):
        evaluate_plan(world, Itinerary((0, 999), "09:00"))


# ------------------------------------------------------- check_feasibility

def feasibility_world():
    # 0 apartment, 1 gym, 2 market (8:00-22:00), 3 company, 4 cafe branded
    return build_world(
        [
            {"category": "apartment"},
            {"category": "gym"},
            {"category": "market", "hours": (480, 1320)},
            {"category": "company"},
            {"category": "cafe", "brand": "Bean Scene"},
        ],
        drive=[
            [0, 10, 30, 15, 5],
            [10, 0, 10, 10, 5],
            [30, 10, 0, 10, 5],
            [15, 10, 10, 0, 5],
            [5, 5, 5, 5, 0],
        ],
    )


def test_satisfied_constraints_yield_no_violations():
    w = feasibility_world()
    q = QuerySpec(0, 3, ("gym", "market"), departures=("10:00",))
    assert check_feasibility(w, Itinerary((0, 1, 2, 3), "10:00"), q) == []


def test_missing_category_reported():
    w = feasibility_world()
    q = QuerySpec(0, 3, ("gym",), departures=("10:00",))
    assert check_feasibility(w, Itinerary((0, 2, 3), "10:00"), q) == ["missing_category:gym"]


def test_closed_at_arrival_reported():
    w = feasibility_world()
    tags = check_feasibility(w, Itinerary((0, 2, 3), "22:40"), None)
    assert tags == ["closed_at_arrival:2"]


def test_dwell_past_close_reported():
    w = feasibility_world()
    # market arrival 22:00-30min... departure 21:20, drive 30 -> arrive 21:50, dwell 20 ends 22:10
    tags = check_feasibility(w, Itinerary((0, 2, 3), "21:20"), None)
    assert tags == ["dwell_past_close:2"]


def test_brand_mismatch_reported():
    w = feasibility_world()
    q = QuerySpec(0, 3, ("cafe",), brand_preferences={"cafe": "Daily Grind"}, departures=("10:00",))
    assert "brand_mismatch:cafe" in check_feasibility(w, Itinerary((0, 4, 3), "10:00"), q)


def test_missing_charge_reported():
    w = feasibility_world()
    q = QuerySpec(0, 3, charge_required=True, departures=("10:00",))
    tags = check_feasibility(w, Itinerary((0, 1, 3), "10:00"), q)
    assert "missing_charge" in tags
    assert "missing_category:charging" in tags


# ------------------------------------------------- apply_charge_absorption

def test_absorption_reproduces_charging_window_shape():
    w = absorption_world()
    q = QuerySpec(0, 3, ("charging", "cafe"), dwell_overrides={"charging": 35}, departures=("11:00",))
    plain = evaluate_plan(w, Itinerary((0, 1, 2, 3), "11:00"), q)
    assert plain.total_min == 10 + 35 + 4 + 6 + 12
    absorbed = apply_charge_absorption(w, plain, q)
    # cafe errand: 2*5 walk + 6 dwell = 16 <= 35, combined stop max(35, 16) = 35
    assert absorbed.total_min == 10 + 35 + 14
    modes = [leg.mode for leg in absorbed.legs]
    assert modes == ["drive", "walk", "walk", "drive"]
    assert [leg.absorbed_into_charge for leg in absorbed.legs] == [False, True, True, False]
    visited = {leg.to_id for leg in absorbed.legs} | {absorbed.legs[0].from_id}
    assert visited == {0, 1, 2, 3}


def test_absorption_requires_errand_to_fit():
    # gym at 20-min walk with 25-min dwell cannot fit a 30-min charge window
    w = build_world(
        [
            {"category": "apartment"},
            {"category": "charging"},
            {"category": "gym"},
            {"category": "company"},
        ],
        drive=[[0, 10, 9, 25], [10, 0, 4, 14], [9, 4, 0, 12], [25, 14, 12, 0]],
        walk=[[0, 0, 0, 0], [0, 0, 20, 0], [0, 20, 0, 0], [0, 0, 0, 0]],
    )
    q = QuerySpec(0, 3, ("charging", "gym"), departures=("11:00",))
    plain = evaluate_plan(w, Itinerary((0, 1, 2, 3), "11:00"), q)
    absorbed = apply_charge_absorption(w, plain, q)
    assert absorbed is plain


def test_absorption_never_increases_total_or_changes_visits():
    w = absorption_world()
    q = QuerySpec(0, 3, ("charging", "cafe"), dwell_overrides={"charging": 35}, departures=("11:00",))
    for stops in ((0, 1, 2, 3), (0, 2, 1, 3)):
        plain = evaluate_plan(w, Itinerary(stops, "11:00"), q)
        absorbed = apply_charge_absorption(w, plain, q)
        assert absorbed.total_min <= plain.total_min
        plain_visits = {leg.from_id for leg in plain.legs} | {leg.to_id for leg in plain.legs}
        abs_visits = {leg.from_id for leg in absorbed.legs} | {leg.to_id for leg in absorbed.legs}
        assert plain_visits == abs_visits


def test_absorption_noop_without_charging_stop():
    w = cafe_world()
    plan = evaluate_plan(w, Itinerary((0, 1, 2), "09:00"))
    assert apply_charge_absorption(w, plan, None) is plan


# ------------------------------------------------------------ solve_optimal

def test_no_required_categories_is_direct_drive(world):
    q = QuerySpec(0, 6, (), departures=("10:00", "11:00"))
    plan = solve_optimal(world, q)
    assert plan.itinerary.stops == (0, 6)
    assert plan.feasible


def test_three_cafe_toy_enumerates_all():
    w = build_world(
        [
            {"category": "apartment"},
            {"category": "cafe", "popularity": [0] * 24},
            {"category": "cafe", "popularity": [40] * 24},
            {"category": "cafe", "popularity": [80] * 24},
            {"category": "company"},
        ],
        drive=[
            [0, 12, 5, 4, 30],
            [12, 0, 9, 9, 10],
            [5, 9, 0, 9, 14],
            [4, 9, 9, 0, 18],
            [30, 10, 14, 18, 0],
        ],
    )
    q = QuerySpec(0, 4, ("cafe",), departures=("11:00",))
    totals = {}
    for pid in (1, 2, 3):
        totals[pid] = evaluate_plan(w, Itinerary((0, pid, 4), "11:00"), q).total_min
    best = min(totals, key=lambda pid: (totals[pid], pid))
    plan = solve_optimal(w, q)
    assert plan.itinerary.stops == (0, best, 4)
    assert plan.total_min == totals[best]


def test_solver_uses_absorption_when_eligible():
    w = absorption_world()
    q = QuerySpec(0, 3, ("cafe", "charging"), dwell_overrides={"charging": 35}, departures=("11:00",))
    plan = solve_optimal(w, q)
    assert plan.total_min == 59.0
    assert plan.itinerary.stops == (0, 1, 2, 3)
    assert any(leg.absorbed_into_charge for leg in plan.legs)


def test_reevaluation_fixpoint_recovers_preabsorption_plan():
    w = absorption_world()
    q = QuerySpec(0, 3, ("cafe", "charging"), dwell_overrides={"charging": 35}, departures=("11:00",))
    plan = solve_optimal(w, q)
    replain = evaluate_plan(w, plan.itinerary, q)
    assert replain.total_min == 67.0
    assert all(leg.mode == "drive" for leg in replain.legs)
    assert apply_charge_absorption(w, replain, q).total_min == plan.total_min


def test_absorption_beats_plain_enumeration_on_seed7(world):
    # SD Apartment -> KE Apartment passing the market/charger pair at 4-min walk
    q = QuerySpec(3, 0, ("market", "charging"), departures=("11:00",))
    plan = solve_optimal(world, q)
    assert plan.itinerary.stops == (3, 16, 38, 0)
    assert any(leg.absorbed_into_charge for leg in plan.legs)
    assert plan.total_min == 66.6

    best_plain = None
    for perm in itertools.permutations(("market", "charging")):
        pools = [world.ids_of_category(c) for c in perm]
        for combo in itertools.product(*pools):
            stops = (3,) + combo + (0,)
            candidate = evaluate_plan(world, Itinerary(stops, "11:00"), q)
            if candidate.feasible and (best_plain is None or candidate.total_min < best_plain):
                best_plain = candidate.total_min
    assert best_plain == 89.2
    assert plan.total_min < best_plain

    oracle = brute_force_oracle(world, QuerySpec(3, 0, ("market", "charging"), departures=("11:00",)))
    assert oracle.itinerary.stops == plan.itinerary.stops
    assert oracle.total_min == plan.total_min


def test_solver_matches_oracle_on_sample_queries(world):
    cases = [
        ((), ("10:00",)),
        (("cafe",), ("11:00",)),
        (("gym", "market"), ("10:00",)),
        (("cafe", "charging"), ("12:00",)),
        (("restaurant", "gym"), ("12:00", "14:00")),
    ]
    for cats, deps in cases:
        a = solve_optimal(world, QuerySpec(0, 6, cats, departures=deps))
        b = brute_force_oracle(world, QuerySpec(0, 6, cats, departures=deps))
        assert a.itinerary.stops == b.itinerary.stops
        assert a.itinerary.departure == b.itinerary.departure
        assert a.total_min == b.total_min


def test_oracle_candidate_space_size(world):
    from topkit.solver import candidate_count

    q = QuerySpec(0, 6, ("gym", "market"), departures=("10:00",))
    assert candidate_count(world, q) == 2 * 6 * 7


def test_price_objective_prefers_cheap_stops():
    specs = [
        {"category": "apartment"},
        {"category": "cafe", "price_level": 3, "popularity": [0] * 24},
        {"category": "cafe", "price_level": 1, "popularity": [0] * 24},
        {"category": "company"},
    ]
    # expensive cafe is much closer, cheap one far away
    drive = [
        [0, 2, 40, 10],
        [2, 0, 40, 8],
        [40, 40, 0, 40],
        [10, 8, 40, 0],
    ]
    w = build_world(specs, drive=drive)
    fast = solve_optimal(w, QuerySpec(0, 3, ("cafe",), departures=("11:00",)))
    cheap = solve_optimal(w, QuerySpec(0, 3, ("cafe",), departures=("11:00",), objective="total_price"))
    assert fast.itinerary.stops == (0, 1, 3)
    assert cheap.itinerary.stops == (0, 2, 3)


def test_dwell_objective_prefers_quiet_stops():
    specs = [
        {"category": "apartment"},
        {"category": "cafe", "popularity": [90] * 24},
        {"category": "cafe", "popularity": [0] * 24},
        {"category": "company"},
    ]
    drive = [
        [0, 2, 40, 10],
        [2, 0, 40, 8],
        [40, 40, 0, 40],
        [10, 8, 40, 0],
    ]
    w = build_world(specs, drive=drive)
    calm = solve_optimal(w, QuerySpec(0, 3, ("cafe",), departures=("11:00",), objective="total_dwell"))
    assert calm.itinerary.stops == (0, 2, 3)


def test_infeasible_result_carries_violations():
    w = feasibility_world()
    # market is closed at 02:00 arrivals, so nothing works
    q = QuerySpec(0, 3, ("market",), departures=("02:00",))
    plan = solve_optimal(w, q)
    assert not plan.feasible
    assert any(tag.startswith("closed_at_arrival") for tag in plan.violations)
    oracle = brute_force_oracle(w, q)
    assert oracle.violations == plan.violations


def test_empty_brand_pool_is_infeasible(world):
    q = QuerySpec(0, 6, ("cafe",), brand_preferences={"cafe": "No Such Brand"}, departures=("10:00",))
    plan = solve_optimal(world, q)
    assert not plan.feasible
    assert "missing_category:cafe" in plan.violations


def test_repeated_solves_identical(world):
    q1 = QuerySpec(2, 8, ("cafe", "gym"), departures=("10:00", "13:00"))
    q2 = QuerySpec(2, 8, ("cafe", "gym"), departures=("10:00", "13:00"))
    a, b = solve_optimal(world, q1), solve_optimal(world, q2)
    assert a == b


def test_query_spec_invariants(world):
    with pytest.raises(ValueError, match="differ"):
        QuerySpec(0, 0, departures=("10:00",))
    with pytest.raises(ValueError, match="duplicates"):
        QuerySpec(0, 1, ("cafe", "cafe"), departures=("10:00",))
    q = QuerySpec(0, 1, ("gas", "charging"), departures=("10:00",))
    with pytest.raises(ValueError, match="co-occur"):
        q.validate(world)
    assert QuerySpec(0, 1, charge_required=True, departures=("10:00",)).required_categories == ("charging",)
    with pytest.raises(ValueError, match="at most 4"):
        QuerySpec(0, 1, ("cafe", "gym", "market", "restaurant"), charge_required=True, departures=("10:00",))


def test_insertion_never_decreases_unabsorbed_total(world):
    base_total = evaluate_plan(world, Itinerary((0, 6), "11:00")).total_min
    for pid in (17, 26, 32, 39, 11):
        bigger = evaluate_plan(world, Itinerary((0, pid, 6), "11:00")).total_min
        assert bigger >= base_total


# -------------------------------------------------------------- nearest_poi

def test_nearest_singleton_category():
    w = cafe_world()
    assert nearest_poi(w, 0, "cafe") == 1


def test_nearest_excludes_origin(world):
    cafe = world.ids_of_category("cafe")[0]
    assert nearest_poi(world, cafe, "cafe") != cafe


def test_nearest_matches_linear_scan(world):
    cafes = world.ids_of_category("cafe")
    expected = min(cafes, key=lambda pid: (world.matrix.distance_km[0][pid], pid))
    assert nearest_poi(world, 0, "cafe") == expected
    assert nearest_poi(world, 0, "cafe") == 20


def test_nearest_empty_category_errors():
    w = cafe_world()
    with pytest.raises(KeyError):
        nearest_poi(w, 0, "gym")


# ----------------------------------------------------------- best_departure

def test_best_departure_singleton(world):
    dep, plan = best_departure(world, (0, 6), None, ["13:00"])
    assert str(dep) == "13:00"
    assert plan.feasible


def test_free_flow_beats_rush_for_pure_drives(world):
    dep, _ = best_departure(world, (0, 6), None, ["09:00", "00:00"])
    assert str(dep) == "00:00"


def test_best_departure_matches_four_explicit_evaluations(world):
    stops = (0, 17, 6)
    anchors = ["00:00", "09:00", "12:00", "18:00"]
    totals = {}
    for a in anchors:
        plan = evaluate_plan(world, Itinerary(stops, a))
        if plan.feasible:
            totals[a] = plan.total_min
    expected = min(sorted(totals), key=lambda a: (totals[a], ClockTime.parse(a).minute_of_day))
    dep, plan = best_departure(world, stops, None, anchors)
    assert str(dep) == expected
    assert plan.total_min == totals[expected]


# ----------------------------------------------------------- best_insertion

def test_insertion_single_slot(world):
    pid, plan = best_insertion(world, Itinerary((0, 6), "11:00"), "cafe")
    scan = {}
    for cand in world.ids_of_category("cafe"):
        scan[cand] = evaluate_plan(world, Itinerary((0, cand, 6), "11:00")).total_min
    expected = min(scan, key=lambda c: (scan[c], c))
    assert pid == expected
    assert plan.total_min == scan[expected]


def test_insertion_skips_poi_already_in_plan(world):
    present = nearest_poi(world, 0, "cafe")
    pid, _ = best_insertion(world, Itinerary((0, present, 6), "11:00"), "cafe")
    assert pid != present


def test_insertion_scans_all_positions(world):
    base = Itinerary((0, 26, 6), "11:00")
    best = None
    for cand in world.ids_of_category("cafe"):
        for pos in (1, 2):
            stops = base.stops[:pos] + (cand,) + base.stops[pos:]
            plan = evaluate_plan(world, Itinerary(stops, "11:00"))
            if not plan.feasible:
                continue
            key = (plan.total_min, pos, cand)
            if best is None or key < best:
                best = key
    pid, plan = best_insertion(world, base, "cafe")
    assert (plan.total_min, pid) == (best[0], best[2])


# ----------------------------------------------------------- compare_routes

def test_compare_identical_routes_ties_to_a(world):
    a = Itinerary((0, 17, 6), "11:00")
    b = Itinerary((0, 17, 6), "11:00")
    result = compare_routes(world, a, b)
    assert result.winner == "A"
    assert result.tie


def test_compare_prefers_subset_route(world):
    shorter = Itinerary((0, 6), "11:00")
    longer = Itinerary((0, 17, 6), "11:00")
    result = compare_routes(world, shorter, longer)
    assert result.winner == "A"
    assert not result.tie


def test_compare_matches_two_evaluations(world):
    a = Itinerary((0, 26, 6), "12:00")
    b = Itinerary((0, 32, 6), "12:00")
    ta = evaluate_plan(world, a).total_min
    tb = evaluate_plan(world, b).total_min
    result = compare_routes(world, a, b)
    assert result.total_a == ta
    assert result.total_b == tb
    assert result.winner == ("B" if tb < ta else "A")

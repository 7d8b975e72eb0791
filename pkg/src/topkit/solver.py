"""Exact itinerary evaluation and optimization.

A plan is valued by forward simulation: each leg's drive time comes from the
traffic bucket of its departure instant, and every stop except the final
destination adds a popularity-stretched dwell. A charging stop can absorb one
adjacent errand done on foot inside the charging window, which removes that
errand's drive legs from the vehicle route.

Three implementations of the same semantics live here on purpose:
``evaluate_plan``/``apply_charge_absorption`` are the readable object
pipeline, ``brute_force_oracle`` enumerates every candidate through that
pipeline with no shortcuts, and ``solve_optimal`` searches the same space
with a fast scalar kernel and pruning. The test suite holds them to exact
agreement.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .timemodel import ClockTime
from .worldmodel import WorldMap

OBJECTIVES = ("total_time", "total_price", "total_dwell")

CHARGING = "charging"


def _bucket_idx(minute: float) -> int:
    m = minute % 1440.0
    if 360.0 <= m < 630.0:
        return 1
    if 630.0 <= m < 900.0:
        return 2
    if 900.0 <= m < 1260.0:
        return 3
    return 0


def _dwell_at(poi, minute: float, override) -> float:
    if override is not None:
        return float(override)
    if poi.base_dwell is None:
        return 0.0
    hour = int(minute % 1440.0) // 60
    return poi.base_dwell * (1.0 + poi.popularity[hour] / 100.0)


def _open_ok(poi, arrive: float, dwell: float) -> bool:
    if poi.always_open:
        return True
    m = arrive % 1440.0
    return poi.open_minute <= m < poi.close_minute and m + dwell <= poi.close_minute


def _clock(minute: float) -> ClockTime:
    return ClockTime.from_minute(int(round(minute)))


@dataclass
class QuerySpec:
    """A structured planning request.

    ``departures`` is the candidate set to optimize over; a single entry
    means the departure is fixed. ``charge_required`` is sugar for having
    ``charging`` among the required categories and is kept in sync.
    """

    origin: int
    destination: int
    required_categories: tuple = ()
    brand_preferences: dict = field(default_factory=dict)
    dwell_overrides: dict = field(default_factory=dict)
    departures: tuple = ()
    objective: str = "total_time"
    charge_required: bool = False

    def __post_init__(self):
        self.required_categories = tuple(self.required_categories)
        self.departures = tuple(
            d if isinstance(d, ClockTime) else ClockTime.parse(d) for d in self.departures
        )
        if self.charge_required and CHARGING not in self.required_categories:
            self.required_categories = self.required_categories + (CHARGING,)
        if CHARGING in self.required_categories:
            self.charge_required = True
        if self.origin == self.destination:
            raise ValueError("origin and destination must differ")
        if len(set(self.required_categories)) != len(self.required_categories):
            raise ValueError("required_categories contains duplicates")
        if len(self.required_categories) > 4:
            raise ValueError("at most 4 required categories per query")
        if self.objective not in OBJECTIVES:
            raise ValueError(f"unknown objective {self.objective!r}")

    def validate(self, world: WorldMap) -> None:
        world.poi(self.origin)
        world.poi(self.destination)
        cats = self.required_categories
        for i in range(len(cats)):
            for j in range(i + 1, len(cats)):
                if world.is_excluded_pair(cats[i], cats[j]):
                    raise ValueError(f"categories {cats[i]!r} and {cats[j]!r} may not co-occur in one query")
        if not self.departures:
            raise ValueError("query needs at least one departure candidate")


@dataclass
class Itinerary:
    stops: tuple
    departure: ClockTime

    def __post_init__(self):
        self.stops = tuple(self.stops)
        if isinstance(self.departure, str):
            self.departure = ClockTime.parse(self.departure)
        if len(self.stops) < 2:
            raise ValueError("an itinerary needs at least origin and destination")
        if len(set(self.stops)) != len(self.stops):
            raise ValueError(f"repeated stop in itinerary {self.stops}")


@dataclass
class Leg:
    from_id: int
    to_id: int
    mode: str  # "drive" or "walk"
    depart: ClockTime
    travel_min: float
    arrive: ClockTime
    dwell_min: float
    absorbed_into_charge: bool = False


@dataclass
class EvaluatedPlan:
    itinerary: Itinerary
    legs: list
    total_min: float
    feasible: bool
    violations: list
    origin_dwell_min: float = 0.0


@dataclass
class RouteComparison:
    winner: str  # "A" or "B"
    tie: bool
    total_a: float
    total_b: float


@dataclass
class _SimResult:
    total: float
    origin_dwell: float
    legs: list
    visits: list  # (poi_id, arrival_minute, dwell_min) in visit order
    all_eligible: bool
    dwell_sum: float


def _violations(world: WorldMap, query: QuerySpec | None, visits: list) -> list:
    tags = []
    visited_ids = [pid for pid, _, _ in visits]
    if query is not None:
        present = {world.poi(pid).category for pid in visited_ids}
        for cat in query.required_categories:
            if cat not in present:
                tags.append(f"missing_category:{cat}")
    for pid, arrive, dwell in visits:
        poi = world.poi(pid)
        if poi.always_open:
            continue
        m = arrive % 1440.0
        if not (poi.open_minute <= m < poi.close_minute):
            tags.append(f"closed_at_arrival:{pid}")
        elif m + dwell > poi.close_minute:
            tags.append(f"dwell_past_close:{pid}")
    if query is not None:
        for cat in sorted(query.brand_preferences):
            wanted = query.brand_preferences[cat]
            for pid in visited_ids:
                poi = world.poi(pid)
                if poi.category == cat and poi.brand != wanted:
                    tags.append(f"brand_mismatch:{cat}")
                    break
        if query.charge_required and all(world.poi(pid).category != CHARGING for pid in visited_ids):
            tags.append("missing_charge")
    return tags


def _sim_structure(
    world: WorldMap,
    query: QuerySpec | None,
    vehicle: list,
    dep_minute: float,
    absorbed: dict,
) -> _SimResult:
    """Simulate a vehicle stop order with optional on-foot absorptions.

    ``absorbed`` maps a charging stop id to the errand stop visited on foot
    during its window. The combined stop occupies max(charge, walk + dwell +
    walk) minutes per the concurrency rule.
    """
    overrides = query.dwell_overrides if query is not None else {}
    drive = world.matrix.drive_minutes
    walk = world.matrix.walk_minutes

    origin = world.poi(vehicle[0])
    t = float(dep_minute)
    origin_dwell = _dwell_at(origin, t, overrides.get(origin.category))
    visits = [(vehicle[0], t, origin_dwell)]
    total = origin_dwell
    dwell_sum = origin_dwell
    t = t + origin_dwell
    legs = []
    all_eligible = True

    last = len(vehicle) - 1
    for k in range(last):
        a, b = vehicle[k], vehicle[k + 1]
        depart = t
        travel = drive[_bucket_idx(depart)][a][b]
        arrive = depart + travel
        to_poi = world.poi(b)
        dwell = 0.0 if k + 1 == last else _dwell_at(to_poi, arrive, overrides.get(to_poi.category))
        legs.append(Leg(a, b, "drive", _clock(depart), float(travel), _clock(arrive), dwell))
        visits.append((b, arrive, dwell))
        if b in absorbed:
            q = absorbed[b]
            q_poi = world.poi(q)
            w = walk[b][q]
            walk_arrive = arrive + w
            q_dwell = _dwell_at(q_poi, walk_arrive, overrides.get(q_poi.category))
            errand = 2 * w + q_dwell
            if errand > dwell:
                all_eligible = False
            combined = dwell if dwell >= errand else errand
            legs.append(
                Leg(b, q, "walk", _clock(arrive), float(w), _clock(walk_arrive), q_dwell, absorbed_into_charge=True)
            )
            back = walk_arrive + q_dwell
            legs.append(
                Leg(q, b, "walk", _clock(back), float(w), _clock(back + w), 0.0, absorbed_into_charge=True)
            )
            visits.append((q, walk_arrive, q_dwell))
            total = total + travel
            total = total + combined
            dwell_sum = dwell_sum + dwell
            dwell_sum = dwell_sum + q_dwell
            t = arrive + combined
        else:
            total = total + travel
            total = total + dwell
            dwell_sum = dwell_sum + dwell
            t = arrive + dwell

    return _SimResult(total, origin_dwell, legs, visits, all_eligible, dwell_sum)


def evaluate_plan(world: WorldMap, itinerary: Itinerary, query: QuerySpec | None = None) -> EvaluatedPlan:
    """Forward-simulate an itinerary with no concurrency absorption."""
    for pid in itinerary.stops:
        world.poi(pid)
    sim = _sim_structure(world, query, list(itinerary.stops), itinerary.departure.minute_of_day, {})
    tags = _violations(world, query, sim.visits)
    return EvaluatedPlan(itinerary, sim.legs, sim.total, not tags, tags, sim.origin_dwell)


def check_feasibility(world: WorldMap, itinerary: Itinerary, query: QuerySpec | None = None) -> list:
    """Constraint check of a plain (unabsorbed) plan; empty list means feasible."""
    return evaluate_plan(world, itinerary, query).violations


def _min_dwell_possible(world: WorldMap, query: QuerySpec | None, pid: int) -> float:
    poi = world.poi(pid)
    override = (query.dwell_overrides if query else {}).get(poi.category)
    if override is not None:
        return float(override)
    if poi.base_dwell is None:
        return 0.0
    return poi.base_dwell * (1.0 + min(poi.popularity) / 100.0)


def _max_charge_window(world: WorldMap, query: QuerySpec | None, pid: int) -> float:
    poi = world.poi(pid)
    override = (query.dwell_overrides if query else {}).get(poi.category)
    if override is not None:
        return float(override)
    return poi.base_dwell * (1.0 + max(poi.popularity) / 100.0)


def apply_charge_absorption(world: WorldMap, plan: EvaluatedPlan, query: QuerySpec | None = None) -> EvaluatedPlan:
    """Fold eligible adjacent errands into charging windows.

    For each intermediate charging stop, the stop right before or right
    after it may be visited on foot if the round-trip walk plus its dwell
    fits inside the charging window. At most one errand per charging stop;
    an absorption is kept only when the reworked plan stays feasible and
    does not increase the total. Ties between candidates go to the smaller
    poi id.
    """
    stops = plan.itinerary.stops
    hosts = [pid for pid in stops[1:-1] if world.poi(pid).category == CHARGING]
    if not hosts:
        return plan

    dep = plan.itinerary.departure.minute_of_day
    vehicle = list(stops)
    absorbed: dict = {}
    cur = _sim_structure(world, query, vehicle, dep, absorbed)
    changed = False

    for host in hosts:
        pos = vehicle.index(host)
        window_cap = _max_charge_window(world, query, host)
        candidates = []
        for npos in (pos - 1, pos + 1):
            if npos <= 0 or npos >= len(vehicle) - 1:
                continue
            q = vehicle[npos]
            q_poi = world.poi(q)
            if q_poi.category == CHARGING:
                continue
            w = world.matrix.walk_minutes[host][q]
            # provably ineligible whatever the arrival time turns out to be
            if 2 * w + _min_dwell_possible(world, query, q) > window_cap:
                continue
            trial_vehicle = [s for s in vehicle if s != q]
            trial_absorbed = dict(absorbed)
            trial_absorbed[host] = q
            trial = _sim_structure(world, query, trial_vehicle, dep, trial_absorbed)
            if not trial.all_eligible:
                continue
            if _violations(world, query, trial.visits):
                continue
            if trial.total > cur.total:
                continue
            candidates.append((trial.total, q, trial_vehicle, trial_absorbed, trial))
        if candidates:
            candidates.sort(key=lambda c: (c[0], c[1]))
            _, _, vehicle, absorbed, cur = candidates[0]
            changed = True

    if not changed:
        return plan
    tags = _violations(world, query, cur.visits)
    return EvaluatedPlan(plan.itinerary, cur.legs, cur.total, not tags, tags, cur.origin_dwell)


def _objective_value(world: WorldMap, plan: EvaluatedPlan, objective: str):
    if objective == "total_time":
        return plan.total_min
    if objective == "total_price":
        return sum(world.poi(pid).price_level for pid in plan.itinerary.stops[1:-1])
    dwell = plan.origin_dwell_min
    for leg in plan.legs:
        dwell = dwell + leg.dwell_min
    return dwell


def _pool(world: WorldMap, query: QuerySpec, category: str) -> list:
    ids = sorted(world.ids_of_category(category))
    brand = query.brand_preferences.get(category)
    if brand is not None:
        ids = [pid for pid in ids if world.poi(pid).brand == brand]
    return ids


def candidate_count(world: WorldMap, query: QuerySpec) -> int:
    """Size of the full assignment space the plain enumeration walks."""
    pools = [_pool(world, query, cat) for cat in query.required_categories]
    count = len(query.departures)
    k = len(pools)
    for i in range(2, k + 1):
        count *= i
    for p in pools:
        count *= len(p)
    return count


def _final_plan(world: WorldMap, query: QuerySpec, stops: tuple, departure: ClockTime) -> EvaluatedPlan:
    plan = evaluate_plan(world, Itinerary(stops, departure), query)
    return apply_charge_absorption(world, plan, query)


def _best_attempt(world: WorldMap, query: QuerySpec, pools: list) -> EvaluatedPlan:
    """When nothing is feasible: the candidate with the fewest violations."""
    deps = sorted(query.departures)
    usable = [p for p in pools if p]
    best_key = None
    best = None
    for dep in deps:
        for perm in itertools.permutations(range(len(usable))):
            for combo in itertools.product(*(usable[i] for i in perm)):
                if len(set(combo)) != len(combo):
                    continue
                if query.origin in combo or query.destination in combo:
                    continue
                stops = (query.origin,) + combo + (query.destination,)
                plan = _final_plan(world, query, stops, dep)
                key = (len(plan.violations), dep.minute_of_day, stops)
                if best_key is None or key < best_key:
                    best_key, best = key, plan
    return best


def brute_force_oracle(world: WorldMap, query: QuerySpec) -> EvaluatedPlan:
    """Reference solver: plain enumeration, every candidate pushed through
    evaluate_plan and apply_charge_absorption, no pruning of any kind."""
    query.validate(world)
    pools = [_pool(world, query, cat) for cat in query.required_categories]
    if any(not p for p in pools):
        return _best_attempt(world, query, pools)

    deps = sorted(query.departures)
    best_key = None
    best = None
    for dep in deps:
        dm = dep.minute_of_day
        for perm in itertools.permutations(range(len(pools))):
            for combo in itertools.product(*(pools[i] for i in perm)):
                if len(set(combo)) != len(combo):
                    continue
                if query.origin in combo or query.destination in combo:
                    continue
                stops = (query.origin,) + combo + (query.destination,)
                plan = _final_plan(world, query, stops, dep)
                if not plan.feasible:
                    continue
                key = (_objective_value(world, plan, query.objective), dm, stops)
                if best_key is None or key < best_key:
                    best_key, best = key, plan
    if best is None:
        return _best_attempt(world, query, pools)
    return best


class _Ctx:
    """Per-solve prefetch of world data into flat lists for the scalar kernel."""

    def __init__(self, world: WorldMap, query: QuerySpec):
        self.world = world
        self.query = query
        overrides = query.dwell_overrides
        self.drive = world.matrix.drive_minutes
        self.walk = world.matrix.walk_minutes
        self.override = [overrides.get(p.category) for p in world.pois]
        self.base = [p.base_dwell for p in world.pois]
        self.pop = [p.popularity for p in world.pois]
        self.always_open = [p.always_open for p in world.pois]
        self.open_m = [p.open_minute for p in world.pois]
        self.close_m = [p.close_minute for p in world.pois]
        self.is_charging = [p.category == CHARGING for p in world.pois]
        self.price = [p.price_level for p in world.pois]

    def dwell(self, pid: int, minute: float) -> float:
        ov = self.override[pid]
        if ov is not None:
            return float(ov)
        base = self.base[pid]
        if base is None:
            return 0.0
        return base * (1.0 + self.pop[pid][int(minute % 1440.0) // 60] / 100.0)

    def open_ok(self, pid: int, arrive: float, dwell: float) -> bool:
        if self.always_open[pid]:
            return True
        m = arrive % 1440.0
        return self.open_m[pid] <= m < self.close_m[pid] and m + dwell <= self.close_m[pid]


def _scalar_sim(ctx: _Ctx, vehicle: tuple, dep_minute: float, absorbed: dict):
    """Lean twin of _sim_structure: (total, violations, all_eligible, dwell_sum)."""
    t = float(dep_minute)
    o = vehicle[0]
    origin_dwell = ctx.dwell(o, t)
    viol = 0 if ctx.open_ok(o, t, origin_dwell) else 1
    total = origin_dwell
    dwell_sum = origin_dwell
    t = t + origin_dwell
    all_eligible = True
    drive = ctx.drive
    last = len(vehicle) - 1
    for k in range(last):
        a = vehicle[k]
        b = vehicle[k + 1]
        travel = drive[_bucket_idx(t)][a][b]
        arrive = t + travel
        dwell = 0.0 if k + 1 == last else ctx.dwell(b, arrive)
        if b in absorbed:
            q = absorbed[b]
            w = ctx.walk[b][q]
            walk_arrive = arrive + w
            q_dwell = ctx.dwell(q, walk_arrive)
            errand = 2 * w + q_dwell
            if errand > dwell:
                all_eligible = False
            combined = dwell if dwell >= errand else errand
            if not ctx.open_ok(b, arrive, dwell):
                viol += 1
            if not ctx.open_ok(q, walk_arrive, q_dwell):
                viol += 1
            total = total + travel
            total = total + combined
            dwell_sum = dwell_sum + dwell
            dwell_sum = dwell_sum + q_dwell
            t = arrive + combined
        else:
            if not ctx.open_ok(b, arrive, dwell):
                viol += 1
            total = total + travel
            total = total + dwell
            dwell_sum = dwell_sum + dwell
            t = arrive + dwell
    return total, viol, all_eligible, dwell_sum


def _scalar_candidate(ctx: _Ctx, stops: tuple, dep_minute: float):
    """Value one candidate sequence: plain sim, then the absorption rules.

    Returns (feasible, objective_value, total_min).
    """
    vehicle = stops
    absorbed: dict = {}
    total, viol, _, dwell_sum = _scalar_sim(ctx, vehicle, dep_minute, absorbed)
    hosts = [pid for pid in stops[1:-1] if ctx.is_charging[pid]]
    for host in hosts:
        pos = vehicle.index(host)
        window_cap = _max_charge_window(ctx.world, ctx.query, host)
        picked = None
        for npos in (pos - 1, pos + 1):
            if npos <= 0 or npos >= len(vehicle) - 1:
                continue
            q = vehicle[npos]
            if ctx.is_charging[q]:
                continue
            w = ctx.walk[host][q]
            if 2 * w + _min_dwell_possible(ctx.world, ctx.query, q) > window_cap:
                continue
            trial_vehicle = tuple(s for s in vehicle if s != q)
            trial_absorbed = dict(absorbed)
            trial_absorbed[host] = q
            t_total, t_viol, t_elig, t_dwell = _scalar_sim(ctx, trial_vehicle, dep_minute, trial_absorbed)
            if not t_elig or t_viol or t_total > total:
                continue
            cand = (t_total, q, trial_vehicle, trial_absorbed, t_viol, t_dwell)
            if picked is None or (cand[0], cand[1]) < (picked[0], picked[1]):
                picked = cand
        if picked is not None:
            total, _q, vehicle, absorbed, viol, dwell_sum = picked
    feasible = viol == 0
    if ctx.query.objective == "total_time":
        value = total
    elif ctx.query.objective == "total_price":
        value = sum(ctx.price[pid] for pid in stops[1:-1])
    else:
        value = dwell_sum
    return feasible, value, total


def solve_optimal(world: WorldMap, query: QuerySpec) -> EvaluatedPlan:
    """Exact optimizer over category permutations, POI choices, and departures.

    Must agree with brute_force_oracle on every query; ties break by earlier
    departure, then by the lexicographically smallest stop-id sequence.
    """
    query.validate(world)
    cats = query.required_categories
    pools = [_pool(world, query, cat) for cat in cats]
    if any(not p for p in pools):
        return _best_attempt(world, query, pools)
    # a brand-mismatched origin or destination poisons every candidate alike
    for endpoint in (query.origin, query.destination):
        poi = world.poi(endpoint)
        wanted = query.brand_preferences.get(poi.category)
        if wanted is not None and poi.brand != wanted:
            return _best_attempt(world, query, pools)

    ctx = _Ctx(world, query)
    deps = sorted(query.departures)
    can_absorb = CHARGING in cats
    best_key = None
    best_pick = None

    if can_absorb:
        # Absorption can legitimately rescue or shrink a costly prefix, so no
        # prefix pruning is sound here; enumerate and value with the scalar kernel.
        for dep in deps:
            dm = dep.minute_of_day
            for perm in itertools.permutations(range(len(pools))):
                for combo in itertools.product(*(pools[i] for i in perm)):
                    if len(set(combo)) != len(combo):
                        continue
                    if query.origin in combo or query.destination in combo:
                        continue
                    stops = (query.origin,) + combo + (query.destination,)
                    feasible, value, _ = _scalar_candidate(ctx, stops, float(dm))
                    if not feasible:
                        continue
                    key = (value, dm, stops)
                    if best_key is None or key < best_key:
                        best_key, best_pick = key, (stops, dep)
    else:
        best_key, best_pick = _search_no_charge(ctx, query, pools, deps)

    if best_pick is None:
        return _best_attempt(world, query, pools)
    stops, dep = best_pick
    plan = _final_plan(world, query, stops, dep)
    got = _objective_value(world, plan, query.objective)
    if got != best_key[0] or not plan.feasible:
        raise RuntimeError(
            f"internal inconsistency: search value {best_key[0]} != reconstructed {got} for {stops}"
        )
    return plan


def _search_no_charge(ctx: _Ctx, query: QuerySpec, pools: list, deps: list):
    """Branch-and-bound over prefixes; sound because without a charging stop
    no absorption applies, all costs are nonnegative, and an opening-hours
    violation at a stop is fixed once the prefix is fixed."""
    drive = ctx.drive
    origin = query.origin
    dest = query.destination
    time_objective = query.objective == "total_time"
    n_pools = len(pools)
    best_key = None
    best_pick = None

    for dep in deps:
        dm = dep.minute_of_day
        t0 = float(dm)
        origin_dwell = ctx.dwell(origin, t0)
        if not ctx.open_ok(origin, t0, origin_dwell):
            continue

        stack_stops: list = []

        def dfs(cur: int, t: float, acc: float, dwell_acc: float, remaining: frozenset):
            nonlocal best_key, best_pick
            if time_objective and best_key is not None and acc > best_key[0]:
                return
            if not remaining:
                travel = drive[_bucket_idx(t)][cur][dest]
                arrive = t + travel
                if not ctx.open_ok(dest, arrive, 0.0):
                    return
                total = acc + travel
                if time_objective:
                    value = total
                elif query.objective == "total_price":
                    value = sum(ctx.price[pid] for pid in stack_stops)
                else:
                    value = dwell_acc
                stops = (origin,) + tuple(stack_stops) + (dest,)
                key = (value, dm, stops)
                if best_key is None or key < best_key:
                    best_key = key
                    best_pick = (stops, dep)
                return
            for i in remaining:
                for pid in pools[i]:
                    if pid == origin or pid == dest or pid in stack_stops:
                        continue
                    travel = drive[_bucket_idx(t)][cur][pid]
                    arrive = t + travel
                    dwell = ctx.dwell(pid, arrive)
                    if not ctx.open_ok(pid, arrive, dwell):
                        continue
                    acc2 = acc + travel
                    acc2 = acc2 + dwell
                    stack_stops.append(pid)
                    dfs(pid, arrive + dwell, acc2, dwell_acc + dwell, remaining - {i})
                    stack_stops.pop()

        dfs(origin, t0 + origin_dwell, origin_dwell, origin_dwell, frozenset(range(n_pools)))

    return best_key, best_pick


def nearest_poi(world: WorldMap, origin: int, category: str) -> int:
    """Closest POI of a category to an origin, the origin itself excluded."""
    world.poi(origin)
    ids = [pid for pid in world.ids_of_category(category) if pid != origin]
    if not ids:
        raise KeyError(f"no POIs of category {category!r} other than the origin")
    return min(ids, key=lambda pid: (world.matrix.distance_km[origin][pid], pid))


def best_departure(world: WorldMap, stops, query: QuerySpec | None, candidates) -> tuple:
    """Pick the departure among candidates minimizing the plan's total.

    Ties go to the earliest clock value. If no candidate is feasible the
    least-violating attempt is returned with its departure.
    """
    candidates = sorted(
        c if isinstance(c, ClockTime) else ClockTime.parse(c) for c in candidates
    )
    if not candidates:
        raise ValueError("no departure candidates given")
    best = None
    attempt = None
    for dep in candidates:
        plan = apply_charge_absorption(world, evaluate_plan(world, Itinerary(tuple(stops), dep), query), query)
        if plan.feasible:
            key = (plan.total_min, dep.minute_of_day)
            if best is None or key < best[0]:
                best = (key, dep, plan)
        akey = (len(plan.violations), dep.minute_of_day)
        if attempt is None or akey < attempt[0]:
            attempt = (akey, dep, plan)
    if best is not None:
        return best[1], best[2]
    return attempt[1], attempt[2]


def best_insertion(world: WorldMap, base: Itinerary, category: str, query: QuerySpec | None = None) -> tuple:
    """Best (poi, position) of a category to slot into an existing plan.

    Minimizes the resulting total; ties prefer the earliest position, then
    the smaller poi id. POIs already in the plan are skipped.
    """
    ids = sorted(world.ids_of_category(category))
    if not ids:
        raise KeyError(f"no POIs of category {category!r} on the map")
    best = None
    attempt = None
    for pid in ids:
        if pid in base.stops:
            continue
        for pos in range(1, len(base.stops)):
            stops = base.stops[:pos] + (pid,) + base.stops[pos:]
            plan = apply_charge_absorption(
                world, evaluate_plan(world, Itinerary(stops, base.departure), query), query
            )
            if plan.feasible:
                key = (plan.total_min, pos, pid)
                if best is None or key < best[0]:
                    best = (key, pid, plan)
            akey = (len(plan.violations), pos, pid)
            if attempt is None or akey < attempt[0]:
                attempt = (akey, pid, plan)
    if best is not None:
        return best[1], best[2]
    if attempt is None:
        raise KeyError(f"no insertable POI of category {category!r}")
    return attempt[1], attempt[2]


def compare_routes(world: WorldMap, itinerary_a: Itinerary, itinerary_b: Itinerary, query: QuerySpec | None = None) -> RouteComparison:
    """Which of two fixed routes is faster; exact tie goes to A with a flag."""
    total_a = evaluate_plan(world, itinerary_a, query).total_min
    total_b = evaluate_plan(world, itinerary_b, query).total_min
    if total_b < total_a:
        return RouteComparison("B", False, total_a, total_b)
    return RouteComparison("A", total_a == total_b, total_a, total_b)

"""Seeded instantiation of the benchmark's 16 question templates.

Each template is a fixed English pattern with slots for places, times,
brands, and dwell overrides. Slot sampling redraws until POI ids are
distinct and until multi-category draws contain no excluded pair, so a
fixed seed always yields the same dataset.
"""

from __future__ import annotations

import dataclasses
import random
from dataclasses import dataclass

from .solver import QuerySpec
from .worldmodel import CATEGORIES, WorldMap

ANCHOR_TIMES = ("00:00", "09:00", "12:00", "18:00")
# hard planning departures stay late enough that every category can open
PLAN_DEPARTURES = tuple(f"{h:02d}:00" for h in range(10, 16))
DWELL_OVERRIDE_POOL = (10, 15, 20, 30, 45)
DWELL_CATEGORIES = ("cafe", "gym", "market", "restaurant", "charging")
ENDPOINT_CATEGORIES = ("apartment", "company")
BRAND_CATEGORIES = ("cafe", "charging")
ALL_INTENTION_CAP = 4

OBJECTIVE_WORDS = {"total_price": "total price level", "total_dwell": "total dwell time"}

LEVELS = ("easy", "medium", "hard")
DEFAULT_COUNTS = {"easy": 100, "medium": 200, "hard": 200}

_MAX_REDRAWS = 10000


class GenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class Template:
    template_id: str
    level: str
    category: str
    text_pattern: str
    slot_domains: dict
    workflow_id: str


@dataclass
class QuestionInstance:
    question_id: str
    template_id: str
    level: str
    category: str
    slots: dict
    text: str
    query: dict


def _draw_distinct_poi(rng: random.Random, pool: list, used: set) -> int:
    if all(p in used for p in pool):
        raise GenerationError("slot domain exhausted: fewer distinct POIs than slots")
    pid = rng.choice(pool)
    for _ in range(_MAX_REDRAWS):
        if pid not in used:
            used.add(pid)
            return pid
        pid = rng.choice(pool)
    raise GenerationError("slot domain exhausted after redraws")


def _draw_categories(rng: random.Random, world: WorldMap, pool, k: int) -> list:
    for _ in range(_MAX_REDRAWS):
        cats = rng.sample(list(pool), k)
        bad = any(
            world.is_excluded_pair(cats[i], cats[j])
            for i in range(k)
            for j in range(i + 1, k)
        )
        if not bad:
            return cats
    raise GenerationError("could not draw a category set without an excluded pair")


def _endpoint_pool(world: WorldMap) -> list:
    pool = []
    for cat in ENDPOINT_CATEGORIES:
        pool.extend(world.ids_of_category(cat))
    return sorted(pool)


def _dwell_pool(world: WorldMap) -> list:
    pool = []
    for cat in DWELL_CATEGORIES:
        pool.extend(world.ids_of_category(cat))
    return sorted(pool)


def _endpoints(world: WorldMap, rng: random.Random, used: set) -> tuple:
    pool = _endpoint_pool(world)
    origin = _draw_distinct_poi(rng, pool, used)
    dest = _draw_distinct_poi(rng, pool, used)
    return origin, dest


def _plan_query(world, origin, destination, categories, departure, *, objective="total_time",
                brand_preferences=None, dwell_overrides=None) -> dict:
    payload = {
        "kind": "plan_query",
        "origin": origin,
        "destination": destination,
        "required_categories": list(categories),
        "brand_preferences": dict(brand_preferences or {}),
        "dwell_overrides": dict(dwell_overrides or {}),
        "departure": [departure] if isinstance(departure, str) else list(departure),
        "objective": objective,
        "charge_required": "charging" in categories,
    }
    # instance invariant: the bound query must pass its own checks
    query_spec_from_payload(payload).validate(world)
    return payload


def query_spec_from_payload(payload: dict) -> QuerySpec:
    return QuerySpec(
        origin=payload["origin"],
        destination=payload["destination"],
        required_categories=tuple(payload["required_categories"]),
        brand_preferences=dict(payload.get("brand_preferences", {})),
        dwell_overrides=dict(payload.get("dwell_overrides", {})),
        departures=tuple(payload["departure"]),
        objective=payload.get("objective", "total_time"),
        charge_required=payload.get("charge_required", False),
    )


# ---------------------------------------------------------------- builders

def _present_categories(world) -> list:
    return [c for c in CATEGORIES if world.ids_of_category(c)]


def _build_name_lookup(world, rng):
    cat = rng.choice(_present_categories(world))
    slots = {"category_1": cat}
    text = f"List the names of every {cat} location on the map."
    return slots, text, {"kind": "name_lookup", "category": cat}


def _build_travel_time_driving(world, rng):
    used: set = set()
    pool = [p.id for p in world.pois]
    a = _draw_distinct_poi(rng, pool, used)
    b = _draw_distinct_poi(rng, pool, used)
    t = rng.choice(ANCHOR_TIMES)
    slots = {"poi_a": a, "poi_b": b, "time": t}
    text = (
        f"How many minutes does it take to drive from {world.poi(a).name} "
        f"to {world.poi(b).name} if you depart at {t}?"
    )
    return slots, text, {"kind": "travel_time", "mode": "drive", "from": a, "to": b, "time": t}


def _build_travel_time_walking(world, rng):
    used: set = set()
    pool = [p.id for p in world.pois]
    a = _draw_distinct_poi(rng, pool, used)
    b = _draw_distinct_poi(rng, pool, used)
    slots = {"poi_a": a, "poi_b": b}
    text = f"How many minutes does it take to walk from {world.poi(a).name} to {world.poi(b).name}?"
    return slots, text, {"kind": "travel_time", "mode": "walk", "from": a, "to": b}


def _build_distance_query(world, rng):
    used: set = set()
    pool = [p.id for p in world.pois]
    a = _draw_distinct_poi(rng, pool, used)
    b = _draw_distinct_poi(rng, pool, used)
    slots = {"poi_a": a, "poi_b": b}
    text = f"What is the driving distance in kilometers between {world.poi(a).name} and {world.poi(b).name}?"
    return slots, text, {"kind": "distance", "from": a, "to": b}


def _build_dwell_lookup(world, rng):
    pool = _dwell_pool(world)
    a = _draw_distinct_poi(rng, pool, set())
    t = rng.choice(ANCHOR_TIMES)
    slots = {"poi_a": a, "time": t}
    text = f"How many minutes would you expect to spend at {world.poi(a).name} if you arrive at {t}?"
    return slots, text, {"kind": "dwell", "poi": a, "time": t}


def _build_nearest_neighbor(world, rng):
    pool = [p.id for p in world.pois]
    a = _draw_distinct_poi(rng, pool, set())
    cat = rng.choice(_present_categories(world))
    slots = {"poi_a": a, "category_1": cat}
    text = f"Which {cat} is closest to {world.poi(a).name}?"
    return slots, text, {"kind": "nearest", "origin": a, "category": cat}


def _build_plan_evaluation(world, rng):
    used: set = set()
    origin, dest = _endpoints(world, rng, used)
    pool = _dwell_pool(world)
    a = _draw_distinct_poi(rng, pool, used)
    b = _draw_distinct_poi(rng, pool, used)
    t = rng.choice(ANCHOR_TIMES)
    slots = {"origin": origin, "destination": dest, "poi_a": a, "poi_b": b, "time": t}
    text = (
        f"Starting from {world.poi(origin).name} at {t}, you stop at {world.poi(a).name} "
        f"and then at {world.poi(b).name} before finishing at {world.poi(dest).name}. "
        f"How many minutes does the whole trip take?"
    )
    return slots, text, {"kind": "evaluate", "stops": [origin, a, b, dest], "departure": t}


def _build_route_comparison(world, rng):
    used: set = set()
    origin, dest = _endpoints(world, rng, used)
    pool = _dwell_pool(world)
    a = _draw_distinct_poi(rng, pool, used)
    b = _draw_distinct_poi(rng, pool, used)
    t = rng.choice(ANCHOR_TIMES)
    slots = {"origin": origin, "destination": dest, "poi_a": a, "poi_b": b, "time": t}
    text = (
        f"Route A runs {world.poi(origin).name}, then {world.poi(a).name}, then {world.poi(dest).name}. "
        f"Route B runs {world.poi(origin).name}, then {world.poi(b).name}, then {world.poi(dest).name}. "
        f"Departing at {t}, which route is faster, A or B?"
    )
    return slots, text, {
        "kind": "compare",
        "stops_a": [origin, a, dest],
        "stops_b": [origin, b, dest],
        "departure": t,
    }


def _build_contextual_recommendation(world, rng):
    used: set = set()
    origin, dest = _endpoints(world, rng, used)
    cat = rng.choice(DWELL_CATEGORIES)
    t = rng.choice(PLAN_DEPARTURES)
    slots = {"origin": origin, "destination": dest, "category_1": cat, "time": t}
    text = (
        f"You are driving from {world.poi(origin).name} to {world.poi(dest).name}, leaving at {t}. "
        f"Which {cat} stop adds the least time to the trip?"
    )
    return slots, text, {"kind": "insert", "stops": [origin, dest], "departure": t, "category": cat}


def _build_temporal_optimization(world, rng):
    used: set = set()
    origin, dest = _endpoints(world, rng, used)
    pool = _dwell_pool(world)
    a = _draw_distinct_poi(rng, pool, used)
    slots = {"origin": origin, "destination": dest, "poi_a": a}
    text = (
        f"You will drive from {world.poi(origin).name} to {world.poi(dest).name} with a stop "
        f"at {world.poi(a).name}. Should you leave at 00:00, 09:00, 12:00, or 18:00 to minimize "
        f"the total trip time?"
    )
    return slots, text, {
        "kind": "best_departure",
        "stops": [origin, a, dest],
        "candidates": list(ANCHOR_TIMES),
    }


def _build_single_factor(world, rng):
    used: set = set()
    origin, dest = _endpoints(world, rng, used)
    cats = _draw_categories(rng, world, DWELL_CATEGORIES, 2)
    objective = rng.choice(("total_price", "total_dwell"))
    t = rng.choice(PLAN_DEPARTURES)
    slots = {
        "origin": origin,
        "destination": dest,
        "category_1": cats[0],
        "category_2": cats[1],
        "objective": objective,
        "time": t,
    }
    text = (
        f"Plan a trip from {world.poi(origin).name} to {world.poi(dest).name} that visits one {cats[0]} "
        f"and one {cats[1]}, leaving at {t}; among such plans, pick stops that minimize the "
        f"{OBJECTIVE_WORDS[objective]}."
    )
    query = _plan_query(world, origin, dest, cats, t, objective=objective)
    return slots, text, query


def _build_full_itinerary(world, rng):
    used: set = set()
    origin, dest = _endpoints(world, rng, used)
    cats = _draw_categories(rng, world, DWELL_CATEGORIES, 2)
    t = rng.choice(PLAN_DEPARTURES)
    slots = {"origin": origin, "destination": dest, "category_1": cats[0], "category_2": cats[1], "time": t}
    text = (
        f"Plan the fastest trip from {world.poi(origin).name} to {world.poi(dest).name} that includes "
        f"one {cats[0]} stop and one {cats[1]} stop, leaving at {t}."
    )
    return slots, text, _plan_query(world, origin, dest, cats, t)


def _build_multi_constraint(world, rng):
    used: set = set()
    origin, dest = _endpoints(world, rng, used)
    cats = _draw_categories(rng, world, DWELL_CATEGORIES, 3)
    t = rng.choice(PLAN_DEPARTURES)
    slots = {
        "origin": origin,
        "destination": dest,
        "category_1": cats[0],
        "category_2": cats[1],
        "category_3": cats[2],
        "time": t,
    }
    text = (
        f"Plan the fastest trip from {world.poi(origin).name} to {world.poi(dest).name} that includes "
        f"a {cats[0]} stop, a {cats[1]} stop, and a {cats[2]} stop, departing at {t}."
    )
    return slots, text, _plan_query(world, origin, dest, cats, t)


def _build_preference_aware(world, rng):
    used: set = set()
    origin, dest = _endpoints(world, rng, used)
    brand_cat = rng.choice(BRAND_CATEGORIES)
    other_pool = [c for c in DWELL_CATEGORIES if c != brand_cat]
    for _ in range(_MAX_REDRAWS):
        other = rng.choice(other_pool)
        if not world.is_excluded_pair(brand_cat, other):
            break
    else:
        raise GenerationError("no companion category compatible with the brand category")
    brands = sorted({world.poi(pid).brand for pid in world.ids_of_category(brand_cat)})
    brand = rng.choice(brands)
    t = rng.choice(PLAN_DEPARTURES)
    slots = {
        "origin": origin,
        "destination": dest,
        "category_1": brand_cat,
        "category_2": other,
        "brand": brand,
        "time": t,
    }
    text = (
        f"Plan the fastest trip from {world.poi(origin).name} to {world.poi(dest).name} visiting one "
        f"{brand_cat} and one {other}, leaving at {t}; for the {brand_cat} stop, only the {brand} "
        f"brand is acceptable."
    )
    query = _plan_query(world, origin, dest, [brand_cat, other], t, brand_preferences={brand_cat: brand})
    return slots, text, query


def _build_custom_dwell(world, rng):
    used: set = set()
    origin, dest = _endpoints(world, rng, used)
    cats = _draw_categories(rng, world, DWELL_CATEGORIES, 2)
    override = rng.choice(DWELL_OVERRIDE_POOL)
    t = rng.choice(PLAN_DEPARTURES)
    slots = {
        "origin": origin,
        "destination": dest,
        "category_1": cats[0],
        "category_2": cats[1],
        "dwell_override": override,
        "time": t,
    }
    text = (
        f"Plan the fastest trip from {world.poi(origin).name} to {world.poi(dest).name} with one "
        f"{cats[0]} stop and one {cats[1]} stop, leaving at {t}; you will spend exactly {override} "
        f"minutes at the {cats[0]} stop."
    )
    query = _plan_query(world, origin, dest, cats, t, dwell_overrides={cats[0]: override})
    return slots, text, query


def _build_all_intention(world, rng):
    used: set = set()
    origin, dest = _endpoints(world, rng, used)
    cats = _draw_categories(rng, world, DWELL_CATEGORIES, ALL_INTENTION_CAP)
    t = rng.choice(PLAN_DEPARTURES)
    slots = {
        "origin": origin,
        "destination": dest,
        "category_1": cats[0],
        "category_2": cats[1],
        "category_3": cats[2],
        "category_4": cats[3],
        "time": t,
    }
    text = (
        f"Leaving {world.poi(origin).name} at {t}, run all your errands in the least total time: "
        f"visit one {cats[0]}, one {cats[1]}, one {cats[2]}, and one {cats[3]}, then end at "
        f"{world.poi(dest).name}."
    )
    return slots, text, _plan_query(world, origin, dest, cats, t)


_BUILDERS = {
    "name_lookup": _build_name_lookup,
    "travel_time_driving": _build_travel_time_driving,
    "travel_time_walking": _build_travel_time_walking,
    "distance_query": _build_distance_query,
    "dwell_lookup": _build_dwell_lookup,
    "nearest_neighbor": _build_nearest_neighbor,
    "plan_evaluation": _build_plan_evaluation,
    "route_comparison": _build_route_comparison,
    "contextual_recommendation": _build_contextual_recommendation,
    "temporal_optimization": _build_temporal_optimization,
    "single_factor_optimization": _build_single_factor,
    "full_itinerary": _build_full_itinerary,
    "multi_constraint": _build_multi_constraint,
    "preference_aware": _build_preference_aware,
    "custom_dwell": _build_custom_dwell,
    "all_intention": _build_all_intention,
}


def _template(category, level, pattern, domains):
    return Template(
        template_id=f"tpl_{category}",
        level=level,
        category=category,
        text_pattern=pattern,
        slot_domains=domains,
        workflow_id=f"wf_{category}",
    )


TEMPLATES = (
    _template("name_lookup", "easy", "List the names of every {category_1} location on the map.",
              {"category_1": "any category"}),
    _template("travel_time_driving", "easy",
              "How many minutes does it take to drive from {poi_a} to {poi_b} if you depart at {time}?",
              {"poi_a": "any poi", "poi_b": "any poi", "time": "anchor times"}),
    _template("travel_time_walking", "easy",
              "How many minutes does it take to walk from {poi_a} to {poi_b}?",
              {"poi_a": "any poi", "poi_b": "any poi"}),
    _template("distance_query", "easy",
              "What is the driving distance in kilometers between {poi_a} and {poi_b}?",
              {"poi_a": "any poi", "poi_b": "any poi"}),
    _template("dwell_lookup", "easy",
              "How many minutes would you expect to spend at {poi_a} if you arrive at {time}?",
              {"poi_a": "dwell-bearing poi", "time": "anchor times"}),
    _template("nearest_neighbor", "easy", "Which {category_1} is closest to {poi_a}?",
              {"poi_a": "any poi", "category_1": "any category"}),
    _template("plan_evaluation", "medium",
              "Starting from {origin} at {time}, you stop at {poi_a} and then at {poi_b} before "
              "finishing at {destination}. How many minutes does the whole trip take?",
              {"origin": "endpoint", "destination": "endpoint", "poi_a": "dwell-bearing poi",
               "poi_b": "dwell-bearing poi", "time": "anchor times"}),
    _template("route_comparison", "medium",
              "Route A runs {origin}, then {poi_a}, then {destination}. Route B runs {origin}, then "
              "{poi_b}, then {destination}. Departing at {time}, which route is faster, A or B?",
              {"origin": "endpoint", "destination": "endpoint", "poi_a": "dwell-bearing poi",
               "poi_b": "dwell-bearing poi", "time": "anchor times"}),
    _template("contextual_recommendation", "medium",
              "You are driving from {origin} to {destination}, leaving at {time}. Which {category_1} "
              "stop adds the least time to the trip?",
              {"origin": "endpoint", "destination": "endpoint", "category_1": "dwell category",
               "time": "plan departures"}),
    _template("temporal_optimization", "medium",
              "You will drive from {origin} to {destination} with a stop at {poi_a}. Should you leave "
              "at 00:00, 09:00, 12:00, or 18:00 to minimize the total trip time?",
              {"origin": "endpoint", "destination": "endpoint", "poi_a": "dwell-bearing poi"}),
    _template("single_factor_optimization", "medium",
              "Plan a trip from {origin} to {destination} that visits one {category_1} and one "
              "{category_2}, leaving at {time}; among such plans, pick stops that minimize the "
              "{objective}.",
              {"origin": "endpoint", "destination": "endpoint", "category_1": "dwell category",
               "category_2": "dwell category", "objective": "price or dwell", "time": "plan departures"}),
    _template("full_itinerary", "hard",
              "Plan the fastest trip from {origin} to {destination} that includes one {category_1} "
              "stop and one {category_2} stop, leaving at {time}.",
              {"origin": "endpoint", "destination": "endpoint", "category_1": "dwell category",
               "category_2": "dwell category", "time": "plan departures"}),
    _template("multi_constraint", "hard",
              "Plan the fastest trip from {origin} to {destination} that includes a {category_1} stop, "
              "a {category_2} stop, and a {category_3} stop, departing at {time}.",
              {"origin": "endpoint", "destination": "endpoint", "category_1": "dwell category",
               "category_2": "dwell category", "category_3": "dwell category", "time": "plan departures"}),
    _template("preference_aware", "hard",
              "Plan the fastest trip from {origin} to {destination} visiting one {category_1} and one "
              "{category_2}, leaving at {time}; for the {category_1} stop, only the {brand} brand is "
              "acceptable.",
              {"origin": "endpoint", "destination": "endpoint", "category_1": "brand category",
               "category_2": "dwell category", "brand": "brands on map", "time": "plan departures"}),
    _template("custom_dwell", "hard",
              "Plan the fastest trip from {origin} to {destination} with one {category_1} stop and one "
              "{category_2} stop, leaving at {time}; you will spend exactly {dwell_override} minutes at "
              "the {category_1} stop.",
              {"origin": "endpoint", "destination": "endpoint", "category_1": "dwell category",
               "category_2": "dwell category", "dwell_override": "override minutes", "time": "plan departures"}),
    _template("all_intention", "hard",
              "Leaving {origin} at {time}, run all your errands in the least total time: visit one "
              "{category_1}, one {category_2}, one {category_3}, and one {category_4}, then end at "
              "{destination}.",
              {"origin": "endpoint", "destination": "endpoint", "category_1": "dwell category",
               "category_2": "dwell category", "category_3": "dwell category",
               "category_4": "dwell category", "time": "plan departures"}),
)

TEMPLATES_BY_LEVEL = {level: tuple(t for t in TEMPLATES if t.level == level) for level in LEVELS}
CATEGORY_LEVEL = {t.category: t.level for t in TEMPLATES}


def instantiate_question(template: Template, world: WorldMap, rng: random.Random,
                         question_id: str = "") -> QuestionInstance:
    """Bind one template's slots against the map using the given rng state."""
    try:
        slots, text, query = _BUILDERS[template.category](world, rng)
    except GenerationError as exc:
        raise GenerationError(f"template {template.template_id}: {exc}") from None
    return QuestionInstance(
        question_id=question_id,
        template_id=template.template_id,
        level=template.level,
        category=template.category,
        slots=slots,
        text=text,
        query=query,
    )


def generate_dataset(world: WorldMap, seed: int, counts: dict | None = None) -> list:
    """The full question set: templates cycled round-robin within each level."""
    counts = dict(DEFAULT_COUNTS, **(counts or {}))
    for level, n in counts.items():
        if level not in LEVELS:
            raise ValueError(f"unknown level {level!r}")
        if n <= 0:
            raise ValueError(f"count for level {level!r} must be positive")
    rng = random.Random(seed)
    instances = []
    ordinals: dict = {}
    for level in LEVELS:
        templates = TEMPLATES_BY_LEVEL[level]
        for i in range(counts[level]):
            template = templates[i % len(templates)]
            ordinal = ordinals.get(template.category, 0) + 1
            ordinals[template.category] = ordinal
            qid = f"L{level}-{template.category}-{ordinal}"
            instances.append(instantiate_question(template, world, rng, question_id=qid))
    return instances


def paraphrase_hook(instance: QuestionInstance, transformer) -> QuestionInstance:
    """Rewrite only the surface text; slots, query, and answers are untouched.

    The default pipeline uses the identity transformer. A transformer that
    returns an empty string is rejected and the original text kept.
    """
    new_text = transformer(instance.text)
    if not new_text:
        return instance
    return dataclasses.replace(instance, text=new_text)


def instance_to_dict(instance: QuestionInstance) -> dict:
    return {
        "id": instance.question_id,
        "level": instance.level,
        "category": instance.category,
        "template_id": instance.template_id,
        "text": instance.text,
        "slots": dict(instance.slots),
        "query": instance.query,
    }


def instance_from_dict(data: dict) -> QuestionInstance:
    return QuestionInstance(
        question_id=data["id"],
        template_id=data["template_id"],
        level=data["level"],
        category=data["category"],
        slots=dict(data["slots"]),
        text=data["text"],
        query=data["query"],
    )

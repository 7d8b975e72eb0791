"""Deterministic ground-truth annotation and the benchmark file format.

Every question category maps to one workflow: easy lookups read the stored
matrices or the dwell model directly, medium tasks compose evaluation and
small searches, and all hard planning tasks run the exact optimizer. Text is
never consulted, so paraphrased questions annotate identically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import solver as solver_mod
from .jsonio import dump_json, load_json
from .questgen import QuestionInstance, instance_from_dict, instance_to_dict, query_spec_from_payload
from .solver import Itinerary, best_departure, best_insertion, candidate_count, compare_routes, evaluate_plan, nearest_poi
from .timemodel import ClockTime, bucket_of, dwell_minutes
from .worldmodel import WorldMap

KINDS = ("name_list", "minutes", "kilometers", "poi", "clock", "plan", "label")

EXPECTED_KIND = {
    "name_lookup": "name_list",
    "travel_time_driving": "minutes",
    "travel_time_walking": "minutes",
    "distance_query": "kilometers",
    "dwell_lookup": "minutes",
    "nearest_neighbor": "poi",
    "plan_evaluation": "minutes",
    "route_comparison": "label",
    "contextual_recommendation": "poi",
    "temporal_optimization": "clock",
    "single_factor_optimization": "plan",
    "full_itinerary": "plan",
    "multi_constraint": "plan",
    "preference_aware": "plan",
    "custom_dwell": "plan",
    "all_intention": "plan",
}


class AnnotationError(RuntimeError):
    pass


class BenchmarkFormatError(ValueError):
    pass


@dataclass
class GroundTruth:
    kind: str
    value: object
    auxiliary: dict = field(default_factory=dict)


@dataclass
class BenchmarkRecord:
    question: QuestionInstance
    ground_truth: GroundTruth


@dataclass
class Benchmark:
    map_seed: int
    map_hash: str
    records: list


def _poi_value(world: WorldMap, pid: int) -> dict:
    return {"id": pid, "name": world.poi(pid).name}


def _legs_payload(world: WorldMap, plan) -> list:
    return [
        {
            "from": world.poi(leg.from_id).name,
            "to": world.poi(leg.to_id).name,
            "mode": leg.mode,
            "depart": str(leg.depart),
            "travel_min": round(leg.travel_min, 1),
            "arrive": str(leg.arrive),
            "dwell_min": round(leg.dwell_min, 1),
            "absorbed_into_charge": leg.absorbed_into_charge,
        }
        for leg in plan.legs
    ]


def _plan_truth(world: WorldMap, plan, considered: int) -> GroundTruth:
    if not plan.feasible:
        return GroundTruth(
            kind="plan",
            value=None,
            auxiliary={
                "considered_count": considered,
                "infeasible_reason": ";".join(plan.violations),
            },
        )
    value = {
        "stops": [world.poi(pid).name for pid in plan.itinerary.stops],
        "departure": str(plan.itinerary.departure),
    }
    return GroundTruth(
        kind="plan",
        value=value,
        auxiliary={
            "total_min": round(plan.total_min, 1),
            "leg_breakdown": _legs_payload(world, plan),
            "considered_count": considered,
        },
    )


def annotate(world: WorldMap, instance: QuestionInstance, solver=None) -> GroundTruth:
    """Compute one question's answer through its category workflow.

    ``solver`` picks the optimizer for plan-valued workflows; the default is
    the pruned exact solver, while verification passes the brute-force
    enumerator and expects identical output.
    """
    solver = solver or solver_mod.solve_optimal
    q = instance.query
    kind = q.get("kind")

    if kind == "name_lookup":
        names = [world.poi(pid).name for pid in world.ids_of_category(q["category"])]
        return GroundTruth("name_list", names)

    if kind == "travel_time":
        a, b = q["from"], q["to"]
        world.poi(a)
        world.poi(b)
        if q["mode"] == "drive":
            bucket = bucket_of(ClockTime.parse(q["time"]))
            minutes = world.matrix.drive_minutes[bucket.value][a][b]
        else:
            minutes = world.matrix.walk_minutes[a][b]
        return GroundTruth("minutes", round(float(minutes), 1))

    if kind == "distance":
        km = world.matrix.distance_km[q["from"]][q["to"]]
        return GroundTruth("kilometers", round(float(km), 1))

    if kind == "dwell":
        poi = world.poi(q["poi"])
        minutes = dwell_minutes(poi, ClockTime.parse(q["time"]))
        return GroundTruth("minutes", round(minutes, 1))

    if kind == "nearest":
        pid = nearest_poi(world, q["origin"], q["category"])
        return GroundTruth("poi", _poi_value(world, pid))

    if kind == "evaluate":
        itinerary = Itinerary(tuple(q["stops"]), ClockTime.parse(q["departure"]))
        plan = evaluate_plan(world, itinerary)
        return GroundTruth(
            "minutes",
            round(plan.total_min, 1),
            auxiliary={"total_min": round(plan.total_min, 1), "leg_breakdown": _legs_payload(world, plan)},
        )

    if kind == "compare":
        dep = ClockTime.parse(q["departure"])
        result = compare_routes(
            world,
            Itinerary(tuple(q["stops_a"]), dep),
            Itinerary(tuple(q["stops_b"]), dep),
        )
        winner_total = result.total_a if result.winner == "A" else result.total_b
        return GroundTruth("label", result.winner, auxiliary={"total_min": round(winner_total, 1)})

    if kind == "insert":
        base = Itinerary(tuple(q["stops"]), ClockTime.parse(q["departure"]))
        pid, plan = best_insertion(world, base, q["category"])
        eligible = [p for p in world.ids_of_category(q["category"]) if p not in base.stops]
        considered = len(eligible) * (len(base.stops) - 1)
        if not plan.feasible:
            return GroundTruth(
                "poi",
                None,
                auxiliary={"considered_count": considered, "infeasible_reason": ";".join(plan.violations)},
            )
        return GroundTruth(
            "poi",
            _poi_value(world, pid),
            auxiliary={"total_min": round(plan.total_min, 1), "considered_count": considered},
        )

    if kind == "best_departure":
        dep, plan = best_departure(world, tuple(q["stops"]), None, q["candidates"])
        if not plan.feasible:
            return GroundTruth(
                "clock",
                None,
                auxiliary={
                    "considered_count": len(q["candidates"]),
                    "infeasible_reason": ";".join(plan.violations),
                },
            )
        return GroundTruth(
            "clock",
            str(dep),
            auxiliary={"total_min": round(plan.total_min, 1), "considered_count": len(q["candidates"])},
        )

    if kind == "plan_query":
        spec = query_spec_from_payload(q)
        plan = solver(world, spec)
        return _plan_truth(world, plan, candidate_count(world, spec))

    raise AnnotationError(f"unknown query kind {kind!r}")


def annotate_all(world: WorldMap, instances, solver=None) -> list:
    records = []
    for instance in instances:
        try:
            truth = annotate(world, instance, solver=solver)
        except AnnotationError:
            raise
        except Exception as exc:
            raise AnnotationError(f"question {instance.question_id}: {exc}") from exc
        expected = EXPECTED_KIND[instance.category]
        if truth.kind != expected:
            raise AnnotationError(
                f"question {instance.question_id}: workflow produced kind {truth.kind!r}, expected {expected!r}"
            )
        records.append(BenchmarkRecord(question=instance, ground_truth=truth))
    return records


def emit_benchmark(benchmark: Benchmark, path) -> None:
    payload = {
        "map_ref": {"seed": benchmark.map_seed, "hash": benchmark.map_hash},
        "questions": [
            {
                **instance_to_dict(rec.question),
                "ground_truth": {
                    "primary": {"kind": rec.ground_truth.kind, "value": rec.ground_truth.value},
                    "auxiliary": rec.ground_truth.auxiliary,
                },
            }
            for rec in benchmark.records
        ],
    }
    dump_json(payload, path)


def _check_value_shape(kind: str, value, context: str) -> None:
    if value is None:
        return  # infeasible records carry a null primary value
    if kind == "name_list":
        if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
            raise BenchmarkFormatError(f"{context}: name_list value must be a list of strings")
    elif kind in ("minutes", "kilometers"):
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise BenchmarkFormatError(f"{context}: {kind} value must be a number")
    elif kind == "poi":
        if not isinstance(value, dict) or "id" not in value or "name" not in value:
            raise BenchmarkFormatError(f"{context}: poi value must carry id and name")
    elif kind == "clock":
        try:
            ClockTime.parse(value)
        except (TypeError, ValueError):
            raise BenchmarkFormatError(f"{context}: clock value {value!r} is not HH:MM") from None
    elif kind == "plan":
        if not isinstance(value, dict) or "stops" not in value or "departure" not in value:
            raise BenchmarkFormatError(f"{context}: plan value must carry stops and departure")
    elif kind == "label":
        if value not in ("A", "B"):
            raise BenchmarkFormatError(f"{context}: label value must be A or B, got {value!r}")


def load_benchmark(path) -> Benchmark:
    try:
        data = load_json(path)
    except ValueError as exc:
        raise BenchmarkFormatError(str(exc)) from None
    if not isinstance(data, dict) or "map_ref" not in data or "questions" not in data:
        raise BenchmarkFormatError(f"{path}: benchmark needs map_ref and questions")
    map_ref = data["map_ref"]
    records = []
    seen = set()
    for i, item in enumerate(data["questions"]):
        ctx = f"questions[{i}]"
        for key in ("id", "level", "category", "template_id", "text", "slots", "query", "ground_truth"):
            if key not in item:
                raise BenchmarkFormatError(f"{ctx}: missing field {key!r}")
        qid = item["id"]
        if qid in seen:
            raise BenchmarkFormatError(f"{ctx}: duplicate question id {qid!r}")
        seen.add(qid)
        gt = item["ground_truth"]
        if "primary" not in gt or "kind" not in gt["primary"] or "value" not in gt["primary"]:
            raise BenchmarkFormatError(f"{ctx}.ground_truth: missing primary kind/value")
        kind = gt["primary"]["kind"]
        if kind not in KINDS:
            raise BenchmarkFormatError(f"{ctx}.ground_truth: unknown kind {kind!r}")
        category = item["category"]
        expected = EXPECTED_KIND.get(category)
        if expected is None:
            raise BenchmarkFormatError(f"{ctx}: unknown category {category!r}")
        if kind != expected:
            raise BenchmarkFormatError(
                f"{ctx}.ground_truth: kind {kind!r} does not match category {category!r} (expects {expected!r})"
            )
        _check_value_shape(kind, gt["primary"]["value"], f"{ctx}.ground_truth")
        records.append(
            BenchmarkRecord(
                question=instance_from_dict(item),
                ground_truth=GroundTruth(kind, gt["primary"]["value"], dict(gt.get("auxiliary", {}))),
            )
        )
    return Benchmark(map_seed=map_ref.get("seed"), map_hash=map_ref.get("hash", ""), records=records)

"""topkit: a deterministic trip-planning benchmark toolkit.

Generates a seeded synthetic city, instantiates a 500-question task set over
it, annotates every question with an exactly-optimal ground truth, and
scores answer files by exact match.
"""

__version__ = "0.1.0"

from .annotator import Benchmark, BenchmarkRecord, GroundTruth, annotate, annotate_all, emit_benchmark, load_benchmark
from .evaluator import AnswerRecord, EvaluationReport, compare_answer, evaluate_run
from .questgen import QuestionInstance, Template, generate_dataset, instantiate_question, paraphrase_hook
from .solver import (
    EvaluatedPlan,
    Itinerary,
    Leg,
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
from .timemodel import Bucket, ClockTime, bucket_of, dwell_minutes, popularity_at
from .worldmodel import GenerationConfig, Poi, TravelMatrix, WorldMap, distance_km, generate_map, load_map, save_map

__all__ = [
    "AnswerRecord",
    "Benchmark",
    "BenchmarkRecord",
    "Bucket",
    "ClockTime",
    "EvaluatedPlan",
    "EvaluationReport",
    "GenerationConfig",
    "GroundTruth",
    "Itinerary",
    "Leg",
    "Poi",
    "QuerySpec",
    "QuestionInstance",
    "Template",
    "TravelMatrix",
    "WorldMap",
    "annotate",
    "annotate_all",
    "apply_charge_absorption",
    "best_departure",
    "best_insertion",
    "brute_force_oracle",
    "bucket_of",
    "check_feasibility",
    "compare_answer",
    "compare_routes",
    "distance_km",
    "dwell_minutes",
    "emit_benchmark",
    "evaluate_plan",
    "evaluate_run",
    "generate_dataset",
    "generate_map",
    "instantiate_question",
    "load_benchmark",
    "load_map",
    "nearest_poi",
    "paraphrase_hook",
    "popularity_at",
    "save_map",
    "solve_optimal",
]

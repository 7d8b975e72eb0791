"""Command-line surface for the whole pipeline.

Exit codes: 0 success, 1 usage error, 2 validation failure, 3 verify mismatch.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .annotator import (
    AnnotationError,
    Benchmark,
    BenchmarkFormatError,
    annotate,
    annotate_all,
    emit_benchmark,
    load_benchmark,
)
from .evaluator import evaluate_run, load_answers, save_report
from .jsonio import dump_json, file_sha256, load_json
from .questgen import GenerationError, generate_dataset, instance_from_dict, instance_to_dict, query_spec_from_payload
from .solver import brute_force_oracle, solve_optimal
from .worldmodel import GenerationConfig, MapFormatError, MapValidationError, generate_map, load_map, save_map

USAGE_ERROR = 1
VALIDATION_ERROR = 2
VERIFY_MISMATCH = 3

DEFAULT_SEED = 7


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _default_seed() -> int:
    env = os.environ.get("TOPKIT_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ValueError(f"TOPKIT_SEED={env!r} is not an integer") from None
    return DEFAULT_SEED


def _build_parser() -> _Parser:
    parser = _Parser(prog="topkit", description="Trip-planning benchmark toolkit")
    parser.add_argument("--version", action="version", version=f"topkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen-map", help="generate the synthetic city map")
    p.add_argument("--seed", type=int, default=None, help="generation seed (default: TOPKIT_SEED or 7)")
    p.add_argument("--config", default=None, help="JSON file overriding generation parameters")
    p.add_argument("-o", "--output", required=True, help="map file to write")

    p = sub.add_parser("gen-questions", help="instantiate the question set")
    p.add_argument("--map", required=True, dest="map_path")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--easy", type=int, default=None, help="override easy-level count")
    p.add_argument("--medium", type=int, default=None)
    p.add_argument("--hard", type=int, default=None)
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("annotate", help="attach deterministic ground truth")
    p.add_argument("--map", required=True, dest="map_path")
    p.add_argument("--questions", required=True)
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("solve", help="solve one ad-hoc planning query")
    p.add_argument("--map", required=True, dest="map_path")
    p.add_argument("--query", required=True, help="JSON file with a plan query")

    p = sub.add_parser("evaluate", help="score an answer file against a benchmark")
    p.add_argument("--benchmark", required=True)
    p.add_argument("--answers", required=True)
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("verify", help="re-derive every ground truth with the brute-force oracle")
    p.add_argument("--benchmark", required=True)
    p.add_argument("--map", required=True, dest="map_path")

    return parser


def _cmd_gen_map(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    config = GenerationConfig()
    if args.config:
        config = GenerationConfig.from_dict(load_json(args.config))
    world = generate_map(seed, config)
    save_map(world, args.output)
    print(f"wrote {args.output}: {len(world.pois)} POIs, seed {seed}")
    return 0


def _cmd_gen_questions(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    world = load_map(args.map_path)
    counts = {}
    for level in ("easy", "medium", "hard"):
        value = getattr(args, level)
        if value is not None:
            counts[level] = value
    instances = generate_dataset(world, seed, counts or None)
    payload = {
        "map_ref": {"seed": world.seed, "hash": file_sha256(args.map_path)},
        "questions": [instance_to_dict(inst) for inst in instances],
    }
    dump_json(payload, args.output)
    print(f"wrote {args.output}: {len(instances)} questions, seed {seed}")
    return 0


def _load_questions(path):
    data = load_json(path)
    if not isinstance(data, dict) or "questions" not in data or "map_ref" not in data:
        raise ValueError(f"{path}: questions file needs map_ref and questions")
    return data["map_ref"], [instance_from_dict(item) for item in data["questions"]]


def _cmd_annotate(args) -> int:
    world = load_map(args.map_path)
    map_hash = file_sha256(args.map_path)
    map_ref, instances = _load_questions(args.questions)
    if map_ref.get("hash") and map_ref["hash"] != map_hash:
        raise ValueError(
            f"{args.questions}: questions were generated against a different map "
            f"(hash {map_ref['hash'][:12]}… != {map_hash[:12]}…)"
        )
    records = annotate_all(world, instances)
    emit_benchmark(Benchmark(map_seed=world.seed, map_hash=map_hash, records=records), args.output)
    print(f"wrote {args.output}: {len(records)} records")
    return 0


def _cmd_solve(args) -> int:
    world = load_map(args.map_path)
    payload = load_json(args.query)
    if payload.get("kind", "plan_query") != "plan_query":
        raise ValueError(f"{args.query}: solve expects a plan query, got kind {payload.get('kind')!r}")
    payload.setdefault("kind", "plan_query")
    spec = query_spec_from_payload(payload)
    spec.validate(world)
    plan = solve_optimal(world, spec)
    out = {
        "feasible": plan.feasible,
        "stops": [world.poi(pid).name for pid in plan.itinerary.stops],
        "departure": str(plan.itinerary.departure),
        "total_min": round(plan.total_min, 1),
        "violations": plan.violations,
        "legs": [
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
        ],
    }
    print(json.dumps(out, ensure_ascii=False, indent=2))
    return 0


def _cmd_evaluate(args) -> int:
    benchmark = load_benchmark(args.benchmark)
    answers = load_answers(args.answers)
    report = evaluate_run(benchmark, answers)
    save_report(report, args.output, tool_version=__version__, map_hash=benchmark.map_hash)
    counts = report.counts
    print(
        f"overall {report.overall:.4f} ({counts['correct']}/{counts['total']}; "
        f"missing {counts['missing']}, orphans {counts['orphans']})"
    )
    return 0


def _cmd_verify(args) -> int:
    world = load_map(args.map_path)
    map_hash = file_sha256(args.map_path)
    benchmark = load_benchmark(args.benchmark)
    if benchmark.map_hash and benchmark.map_hash != map_hash:
        raise ValueError(
            f"{args.benchmark}: benchmark is bound to a different map "
            f"(hash {benchmark.map_hash[:12]}… != {map_hash[:12]}…)"
        )
    mismatches = 0
    for rec in benchmark.records:
        rederived = annotate(world, rec.question, solver=brute_force_oracle)
        if rederived != rec.ground_truth:
            mismatches += 1
            print(f"MISMATCH {rec.question.question_id}", file=sys.stderr)
    if mismatches:
        print(f"{mismatches} mismatching record(s) of {len(benchmark.records)}", file=sys.stderr)
        return VERIFY_MISMATCH
    print(f"verified {len(benchmark.records)} records, zero mismatches")
    return 0


_COMMANDS = {
    "gen-map": _cmd_gen_map,
    "gen-questions": _cmd_gen_questions,
    "annotate": _cmd_annotate,
    "solve": _cmd_solve,
    "evaluate": _cmd_evaluate,
    "verify": _cmd_verify,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (
        MapFormatError,
        MapValidationError,
        BenchmarkFormatError,
        GenerationError,
        AnnotationError,
        ValueError,
        KeyError,
        OSError,
    ) as exc:
        message = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"topkit {args.command}: {message}", file=sys.stderr)
        return VALIDATION_ERROR


if __name__ == "__main__":
    sys.exit(main())

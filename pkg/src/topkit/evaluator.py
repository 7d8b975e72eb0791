"""Exact-match scoring of an answer file against benchmark ground truth."""

from __future__ import annotations

from dataclasses import dataclass, field

from .annotator import Benchmark, GroundTruth, KINDS
from .jsonio import dump_json, load_json
from .questgen import LEVELS, TEMPLATES
from .timemodel import ClockTime

NUMERIC_TOLERANCE = 0.05  # minutes or kilometers


@dataclass
class AnswerRecord:
    question_id: str
    kind: str
    value: object


@dataclass
class EvaluationReport:
    per_question: dict
    per_level: dict
    per_category: dict
    overall: float
    counts: dict = field(default_factory=dict)


def _norm(text) -> str:
    return str(text).strip().casefold()


def compare_answer(gt: GroundTruth, ans: AnswerRecord) -> tuple:
    """(correct, reason). Names compare case-folded, numbers within 0.05,
    plans need the exact stop order and the same departure."""
    if ans.kind != gt.kind:
        return False, "kind_mismatch"
    a, g = ans.value, gt.value
    if g is None or a is None:
        if a is None and g is None:
            return True, "exact_match"
        return False, "value_mismatch"

    if gt.kind == "name_list":
        if not isinstance(a, list):
            return False, "value_mismatch"
        if {_norm(x) for x in a} == {_norm(x) for x in g}:
            return True, "exact_match"
        return False, "value_mismatch"

    if gt.kind in ("minutes", "kilometers"):
        try:
            ok = abs(float(a) - float(g)) <= NUMERIC_TOLERANCE
        except (TypeError, ValueError):
            return False, "value_mismatch"
        return (True, "exact_match") if ok else (False, "value_mismatch")

    if gt.kind == "poi":
        a_name = a.get("name") if isinstance(a, dict) else a
        if a_name is None:
            return False, "value_mismatch"
        if _norm(a_name) == _norm(g["name"]):
            return True, "exact_match"
        return False, "value_mismatch"

    if gt.kind == "clock":
        try:
            same = ClockTime.parse(str(a)) == ClockTime.parse(str(g))
        except ValueError:
            return False, "value_mismatch"
        return (True, "exact_match") if same else (False, "value_mismatch")

    if gt.kind == "label":
        if str(a).strip().upper() == str(g).strip().upper():
            return True, "exact_match"
        return False, "value_mismatch"

    # plan: ordered stops, then departure
    if not isinstance(a, dict) or "stops" not in a or "departure" not in a:
        return False, "value_mismatch"
    a_stops = [_norm(s) for s in a["stops"]]
    g_stops = [_norm(s) for s in g["stops"]]
    if a_stops != g_stops:
        return False, "sequence_mismatch"
    try:
        same_dep = ClockTime.parse(str(a["departure"])) == ClockTime.parse(str(g["departure"]))
    except ValueError:
        return False, "departure_mismatch"
    if not same_dep:
        return False, "departure_mismatch"
    return True, "exact_match"


def evaluate_run(benchmark: Benchmark, answers) -> EvaluationReport:
    """One trial per question. Unknown ids are tallied as orphans and never
    enter a denominator; denominators are always the benchmark size."""
    known = {rec.question.question_id for rec in benchmark.records}
    by_id: dict = {}
    duplicates = 0
    orphans = 0
    for ans in answers:
        if ans.question_id not in known:
            orphans += 1
            continue
        if ans.question_id in by_id:
            duplicates += 1
        by_id[ans.question_id] = ans  # last occurrence wins

    per_question = {}
    level_totals: dict = {}
    level_correct: dict = {}
    cat_totals: dict = {}
    cat_correct: dict = {}
    correct_count = 0
    missing = 0
    for rec in benchmark.records:
        qid = rec.question.question_id
        ans = by_id.get(qid)
        if ans is None:
            correct, reason = False, "missing"
            missing += 1
        else:
            correct, reason = compare_answer(rec.ground_truth, ans)
        per_question[qid] = {"correct": correct, "reason": reason}
        level = rec.question.level
        cat = rec.question.category
        level_totals[level] = level_totals.get(level, 0) + 1
        cat_totals[cat] = cat_totals.get(cat, 0) + 1
        if correct:
            correct_count += 1
            level_correct[level] = level_correct.get(level, 0) + 1
            cat_correct[cat] = cat_correct.get(cat, 0) + 1

    total = len(benchmark.records)
    per_level = {
        level: level_correct.get(level, 0) / level_totals[level]
        for level in LEVELS
        if level in level_totals
    }
    order = [t.category for t in TEMPLATES]
    per_category = {
        cat: cat_correct.get(cat, 0) / cat_totals[cat]
        for cat in order
        if cat in cat_totals
    }
    for cat in sorted(cat_totals):
        if cat not in per_category:
            per_category[cat] = cat_correct.get(cat, 0) / cat_totals[cat]

    return EvaluationReport(
        per_question=per_question,
        per_level=per_level,
        per_category=per_category,
        overall=(correct_count / total) if total else 0.0,
        counts={
            "total": total,
            "correct": correct_count,
            "missing": missing,
            "orphans": orphans,
            "duplicate_answers": duplicates,
        },
    )


def load_answers(path) -> list:
    data = load_json(path)
    if not isinstance(data, dict) or "answers" not in data:
        raise ValueError(f"{path}: answers file needs an 'answers' array")
    out = []
    for i, item in enumerate(data["answers"]):
        ctx = f"answers[{i}]"
        if "question_id" not in item or "answer" not in item:
            raise ValueError(f"{ctx}: needs question_id and answer")
        ans = item["answer"]
        if "kind" not in ans or "value" not in ans:
            raise ValueError(f"{ctx}.answer: needs kind and value")
        if ans["kind"] not in KINDS:
            raise ValueError(f"{ctx}.answer: unknown kind {ans['kind']!r}")
        out.append(AnswerRecord(item["question_id"], ans["kind"], ans["value"]))
    return out


def save_answers(answers, path) -> None:
    dump_json(
        {
            "answers": [
                {"question_id": a.question_id, "answer": {"kind": a.kind, "value": a.value}}
                for a in answers
            ]
        },
        path,
    )


def answers_from_benchmark(benchmark: Benchmark) -> list:
    """Project ground truth into an answer list; scoring it must give 1.0."""
    return [
        AnswerRecord(rec.question.question_id, rec.ground_truth.kind, rec.ground_truth.value)
        for rec in benchmark.records
    ]


def report_payload(report: EvaluationReport, tool_version: str, map_hash: str) -> dict:
    return {
        "tool_version": tool_version,
        "map_hash": map_hash,
        "overall": report.overall,
        "counts": report.counts,
        "per_level": report.per_level,
        "per_category": report.per_category,
        "per_question": report.per_question,
    }


def save_report(report: EvaluationReport, path, tool_version: str, map_hash: str) -> None:
    dump_json(report_payload(report, tool_version, map_hash), path)

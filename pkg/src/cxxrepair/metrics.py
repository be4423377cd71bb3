"""Aggregate evaluation metrics and human-agreement analysis.

Conventions used throughout:
- rates (compile-success, genuine-fix) are percentages of all attempts;
- per-class precision/recall treat 0/0 as 0;
- classes absent from both truth and prediction are left out of macro F1;
- agreement is measured by rotating each rater in as the temporary standard.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from cxxrepair.compile_harness import CompileStatus
from cxxrepair.errors import CorpusError
from cxxrepair.reward import ScoredAttempt, VerdictCategory

ALL_CATEGORIES = tuple(VerdictCategory)


# ---------------------------------------------------------------- evaluation


@dataclass(frozen=True)
class ErrorTypeRow:
    error_type: str
    n: int
    csr: float
    gfr: float


@dataclass
class EvaluationReport:
    n: int
    csr: float
    gfr: float
    quality_distribution: dict[str, int]
    per_error: list[ErrorTypeRow] = field(default_factory=list)


def csr(attempts: Sequence[ScoredAttempt]) -> float:
    """Percentage of attempts whose patch compiled."""
    if not attempts:
        raise ValueError("no attempts to aggregate")
    passed = sum(1 for a in attempts if a.compile_status is CompileStatus.PASS)
    return 100.0 * passed / len(attempts)


def gfr(attempts: Sequence[ScoredAttempt]) -> float:
    """Percentage of attempts judged a genuine fix."""
    if not attempts:
        raise ValueError("no attempts to aggregate")
    genuine = sum(1 for a in attempts if a.category is VerdictCategory.GENUINE_FIX)
    return 100.0 * genuine / len(attempts)


def quality_distribution(attempts: Sequence[ScoredAttempt]) -> dict[str, int]:
    """Verdict counts keyed by category value; every category key is present."""
    if not attempts:
        raise ValueError("no attempts to aggregate")
    counts = Counter(a.category for a in attempts)
    return {category.value: counts.get(category, 0) for category in ALL_CATEGORIES}


def per_error_breakdown(attempts: Sequence[ScoredAttempt]) -> list[ErrorTypeRow]:
    """Per-error-type rates, rows sorted by error_type; empty input gives no rows."""
    groups: dict[str, list[ScoredAttempt]] = {}
    for attempt in attempts:
        groups.setdefault(attempt.error_type, []).append(attempt)
    return [
        ErrorTypeRow(
            error_type=error_type,
            n=len(group),
            csr=csr(group),
            gfr=gfr(group),
        )
        for error_type, group in sorted(groups.items())
    ]


def build_evaluation_report(attempts: Sequence[ScoredAttempt]) -> EvaluationReport:
    return EvaluationReport(
        n=len(attempts),
        csr=csr(attempts),
        gfr=gfr(attempts),
        quality_distribution=quality_distribution(attempts),
        per_error=per_error_breakdown(attempts),
    )


def render_report_text(report: EvaluationReport) -> str:
    lines = [
        f"attempts:              {report.n}",
        f"compile success rate:  {report.csr:.2f}%",
        f"genuine fix rate:      {report.gfr:.2f}%",
        "verdicts:",
    ]
    for category in ALL_CATEGORIES:
        lines.append(f"  {category.value:<24} {report.quality_distribution[category.value]}")
    if report.per_error:
        lines.append("by error type:")
        for row in report.per_error:
            lines.append(
                f"  {row.error_type:<28} n={row.n:<5} csr={row.csr:.2f}% gfr={row.gfr:.2f}%"
            )
    return "\n".join(lines) + "\n"


def render_report_records(report: EvaluationReport) -> str:
    """Machine-readable report: one summary line, then one line per error type."""
    rows = [
        {
            "kind": "summary",
            "n": report.n,
            "csr": report.csr,
            "gfr": report.gfr,
            "quality_distribution": report.quality_distribution,
        }
    ]
    for row in report.per_error:
        rows.append(
            {
                "kind": "error_type",
                "error_type": row.error_type,
                "n": row.n,
                "csr": row.csr,
                "gfr": row.gfr,
            }
        )
    return "".join(json.dumps(row, ensure_ascii=False) + "\n" for row in rows)


# ------------------------------------------------------------- agreement


def macro_f1(
    truth: Mapping[str, VerdictCategory],
    predicted: Mapping[str, VerdictCategory],
    classes: Sequence[VerdictCategory] = ALL_CATEGORIES,
) -> float:
    """Unweighted mean of per-class F1 over classes that occur at all.

    Truth and prediction must label the same items. A class contributing
    neither true nor predicted labels is skipped rather than counted as 0,
    so an unused category cannot drag the mean down.
    """
    if not truth:
        raise ValueError("no labeled items")
    if set(truth) != set(predicted):
        raise ValueError("truth and prediction label different item sets")
    class_set = set(classes)
    for source, labels in (("truth", truth), ("prediction", predicted)):
        unknown = {label for label in labels.values() if label not in class_set}
        if unknown:
            raise ValueError(
                f"{source} uses labels outside the class list: "
                + ", ".join(sorted(label.value for label in unknown))
            )
    scores = []
    for cls in classes:
        tp = sum(1 for item in truth if truth[item] is cls and predicted[item] is cls)
        fp = sum(1 for item in truth if truth[item] is not cls and predicted[item] is cls)
        fn = sum(1 for item in truth if truth[item] is cls and predicted[item] is not cls)
        if tp + fp + fn == 0:
            continue
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        scores.append(f1)
    return sum(scores) / len(scores)


def chance_baseline(num_classes: int) -> float:
    """Expected macro F1 of uniformly random labels over C classes."""
    if num_classes < 1:
        raise ValueError("need at least one class")
    return 1.0 / num_classes


# ------------------------------------------------------------- annotations


@dataclass
class AnnotationSet:
    """Labels collected from a panel session; the grid may be partially filled."""

    items: list[str]
    raters: list[str]
    labels: dict[tuple[str, str], VerdictCategory]

    def __post_init__(self):
        if len(set(self.items)) != len(self.items):
            raise ValueError("duplicate item ids")
        if len(set(self.raters)) != len(self.raters):
            raise ValueError("duplicate rater ids")
        item_set, rater_set = set(self.items), set(self.raters)
        for rater, item in self.labels:
            if rater not in rater_set:
                raise ValueError(f"label by unknown rater: {rater!r}")
            if item not in item_set:
                raise ValueError(f"label for unknown item: {item!r}")

    def __len__(self) -> int:
        return len(self.labels)

    def is_complete(self) -> bool:
        return all(
            (rater, item) in self.labels for rater in self.raters for item in self.items
        )

    def by_rater(self, rater: str) -> dict[str, VerdictCategory]:
        if rater not in self.raters:
            raise ValueError(f"unknown rater: {rater!r}")
        missing = [item for item in self.items if (rater, item) not in self.labels]
        if missing:
            raise ValueError(
                f"rater {rater!r} has not labeled {len(missing)} of {len(self.items)} items"
            )
        return {item: self.labels[(rater, item)] for item in self.items}


@dataclass
class ReliabilityReport:
    overall: float
    per_standard: dict[str, float]


def inter_rater_reliability(
    annotations: AnnotationSet,
    classes: Sequence[VerdictCategory] = ALL_CATEGORIES,
) -> ReliabilityReport:
    """Rotate each rater in as the temporary standard; average the other
    raters' macro F1 against that standard; then average over rotations."""
    if len(annotations.raters) < 2:
        raise ValueError("agreement needs at least two raters")
    if not annotations.is_complete():
        raise ValueError("agreement needs every rater to have labeled every item")
    per_standard = {}
    for standard in annotations.raters:
        truth = annotations.by_rater(standard)
        others = [r for r in annotations.raters if r != standard]
        scores = [macro_f1(truth, annotations.by_rater(other), classes) for other in others]
        per_standard[standard] = sum(scores) / len(scores)
    overall = sum(per_standard.values()) / len(per_standard)
    return ReliabilityReport(overall=overall, per_standard=per_standard)


def consensus_truth(annotations: AnnotationSet) -> dict[str, VerdictCategory]:
    """Majority label per item; unlabeled cells are ignored and ties are dropped."""
    consensus = {}
    for item in annotations.items:
        votes = [
            annotations.labels[(rater, item)]
            for rater in annotations.raters
            if (rater, item) in annotations.labels
        ]
        if not votes:
            continue
        counts = Counter(votes).most_common()
        if len(counts) > 1 and counts[0][1] == counts[1][1]:
            continue
        consensus[item] = counts[0][0]
    return consensus


@dataclass
class MetaEvalReport:
    """A judge's agreement with human consensus."""

    judge_id: str
    n_consensus_items: int
    n_dropped_ties: int
    judge_vs_consensus: float
    human_irr: float
    chance: float


def meta_evaluate_judge(
    judge_labels: Mapping[str, VerdictCategory],
    annotations: AnnotationSet,
    judge_id: str = "judge",
    classes: Sequence[VerdictCategory] = ALL_CATEGORIES,
) -> MetaEvalReport:
    """Score judge labels against the human majority on items with a majority."""
    consensus = consensus_truth(annotations)
    if not consensus:
        raise ValueError("no items reached a consensus label")
    missing = [item for item in consensus if item not in judge_labels]
    if missing:
        raise ValueError(f"judge labels missing for {len(missing)} consensus items")
    predicted = {item: judge_labels[item] for item in consensus}
    return MetaEvalReport(
        judge_id=judge_id,
        n_consensus_items=len(consensus),
        n_dropped_ties=len(annotations.items) - len(consensus),
        judge_vs_consensus=macro_f1(consensus, predicted, classes),
        human_irr=inter_rater_reliability(annotations, classes).overall,
        chance=chance_baseline(len(classes)),
    )


def load_annotations(path: str | Path) -> AnnotationSet:
    """Read a line-delimited label file: rater, item, category per line."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"annotation file not found: {path}")
    items: list[str] = []
    raters: list[str] = []
    labels: dict[tuple[str, str], VerdictCategory] = {}
    with path.open(encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
                rater = str(raw["rater"])
                item = str(raw["item"])
                category = VerdictCategory(raw["category"])
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise CorpusError(f"{path}:{line_no}: bad annotation: {exc}") from exc
            if (rater, item) in labels:
                raise CorpusError(f"{path}:{line_no}: duplicate label by {rater!r} on {item!r}")
            if item not in items:
                items.append(item)
            if rater not in raters:
                raters.append(rater)
            labels[(rater, item)] = category
    return AnnotationSet(items=items, raters=raters, labels=labels)

"""Gated two-part scoring of repair attempts.

The semantic judge classifies a patch into one of four categories; only a
genuine fix earns the judge half of the reward, and the compile half is paid
only on top of a passing judge. Totals are therefore 0.0, 0.5, or 1.0.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from cxxrepair.compile_harness import CompileOutcome, CompilerConfig, CompileStatus, compile_source
from cxxrepair.corpus import Dataset, DatasetRecord
from cxxrepair.errors import CompilerToolError, CorpusError, JudgeProtocolError
from cxxrepair.gateway import ModelGateway, ModelRole, extract_code, render_prompt

logger = logging.getLogger(__name__)

JUDGE_WEIGHT = 0.5
COMPILE_WEIGHT = 0.5
DEFAULT_JUDGE_RETRIES = 2


class VerdictCategory(str, Enum):
    GENUINE_FIX = "genuine_fix"
    TRIVIAL_DELETION = "trivial_deletion"
    EXCESSIVE_MODIFICATION = "excessive_modification"
    INVALID_FIX = "invalid_fix"


# One label token, optionally followed by ": rationale".
_LABEL_RE = re.compile(r"\b(GENUINE_FIX|TRIVIAL_DELETION|EXCESSIVE_MODIFICATION|INVALID_FIX)\b")


@dataclass(frozen=True)
class RepairTask:
    record_id: str
    buggy_source: str
    compiler_message: str

    @classmethod
    def from_record(cls, record: DatasetRecord) -> "RepairTask":
        return cls(
            record_id=record.id,
            buggy_source=record.buggy_source,
            compiler_message=record.compiler_message,
        )


@dataclass(frozen=True)
class PatchProposal:
    task_id: str
    fixed_source: str
    actor_id: str = "unknown"


@dataclass(frozen=True)
class Verdict:
    category: VerdictCategory
    rationale: str
    judge_id: str


@dataclass(frozen=True)
class RewardBreakdown:
    s_judge: float
    s_compile: float

    @property
    def total(self) -> float:
        return self.s_judge + self.s_compile


@dataclass
class ScoreResult:
    task_id: str
    verdict: Verdict
    compile_outcome: CompileOutcome
    reward: RewardBreakdown


def parse_verdict(text: str, judge_id: str) -> Verdict:
    """Extract the single category token and trailing rationale from judge output."""
    matches = list(_LABEL_RE.finditer(text))
    if not matches:
        raise JudgeProtocolError("judge response contains no category token")
    if len(matches) > 1:
        raise JudgeProtocolError(
            f"judge response contains {len(matches)} category tokens, expected exactly one"
        )
    match = matches[0]
    category = VerdictCategory[match.group(1)]
    rest = text[match.end():].lstrip()
    rationale = rest[1:].strip() if rest.startswith(":") else rest.strip()
    return Verdict(category=category, rationale=rationale, judge_id=judge_id)


def judge_fix(
    task: RepairTask,
    patch: PatchProposal,
    gateway: ModelGateway,
    retries: int = DEFAULT_JUDGE_RETRIES,
) -> Verdict:
    """Classify a proposed fix; retries when the judge breaks the output format."""
    template = gateway.template_for(ModelRole.SEMANTIC_JUDGE)
    prompt = render_prompt(
        template,
        {
            "buggy_source": task.buggy_source,
            "compiler_message": task.compiler_message,
            "fixed_source": patch.fixed_source,
        },
    )
    judge_id = gateway.model_for(ModelRole.SEMANTIC_JUDGE)
    last_error: JudgeProtocolError | None = None
    for _ in range(retries + 1):
        response = gateway.complete(prompt, ModelRole.SEMANTIC_JUDGE)
        try:
            return parse_verdict(response.text, judge_id)
        except JudgeProtocolError as exc:
            last_error = exc
            logger.warning("unparseable judge verdict, retrying: %s", exc)
    assert last_error is not None
    raise JudgeProtocolError(
        f"judge produced no parseable verdict after {retries + 1} attempts: {last_error}"
    )


def compute_reward(verdict: Verdict, compiled: bool) -> RewardBreakdown:
    """Gate: compile credit is paid only when the judge credit was earned."""
    s_judge = JUDGE_WEIGHT if verdict.category is VerdictCategory.GENUINE_FIX else 0.0
    s_compile = COMPILE_WEIGHT if (s_judge > 0.0 and compiled) else 0.0
    return RewardBreakdown(s_judge=s_judge, s_compile=s_compile)


def score(
    task: RepairTask,
    patch: PatchProposal,
    compiler: CompilerConfig,
    gateway: ModelGateway,
) -> ScoreResult:
    """Full scoring pass: judge the patch, compile it, combine with the gate.

    The compile always runs (its outcome is reported either way); a broken
    toolchain aborts scoring rather than silently zeroing rewards.
    """
    verdict = judge_fix(task, patch, gateway)
    outcome = compile_source(patch.fixed_source, compiler)
    if outcome.status is CompileStatus.TOOL_ERROR:
        raise CompilerToolError(
            f"compiler could not run while scoring {task.record_id}: "
            f"{outcome.raw_stderr.strip() or 'no stderr'}"
        )
    compiled = outcome.status is CompileStatus.PASS
    return ScoreResult(
        task_id=task.record_id,
        verdict=verdict,
        compile_outcome=outcome,
        reward=compute_reward(verdict, compiled),
    )


def propose_patch(task: RepairTask, gateway: ModelGateway) -> PatchProposal:
    """Ask the actor model for a repaired version of the source."""
    template = gateway.template_for(ModelRole.ACTOR)
    prompt = render_prompt(
        template,
        {
            "buggy_source": task.buggy_source,
            "compiler_message": task.compiler_message,
        },
    )
    response = gateway.complete(prompt, ModelRole.ACTOR)
    return PatchProposal(
        task_id=task.record_id,
        fixed_source=extract_code(response.text),
        actor_id=gateway.model_for(ModelRole.ACTOR),
    )


SCORE_RECORD_FIELDS = (
    "record_id",
    "error_type",
    "actor_id",
    "fixed_source",
    "category",
    "rationale",
    "judge_id",
    "compile_status",
    "s_judge",
    "s_compile",
    "total",
)


@dataclass
class ScoredAttempt:
    """One task's outcome as persisted by an evaluation run; no volatile fields."""

    record_id: str
    error_type: str
    actor_id: str
    fixed_source: str
    category: VerdictCategory
    rationale: str
    judge_id: str
    compile_status: CompileStatus
    s_judge: float
    s_compile: float

    @property
    def total(self) -> float:
        return self.s_judge + self.s_compile

    @property
    def compiled(self) -> bool:
        return self.compile_status is CompileStatus.PASS

    def to_dict(self) -> dict:
        return {
            "record_id": self.record_id,
            "error_type": self.error_type,
            "actor_id": self.actor_id,
            "fixed_source": self.fixed_source,
            "category": self.category.value,
            "rationale": self.rationale,
            "judge_id": self.judge_id,
            "compile_status": self.compile_status.value,
            "s_judge": self.s_judge,
            "s_compile": self.s_compile,
            "total": self.total,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "ScoredAttempt":
        return cls(
            record_id=str(raw["record_id"]),
            error_type=str(raw["error_type"]),
            actor_id=str(raw["actor_id"]),
            fixed_source=str(raw["fixed_source"]),
            category=VerdictCategory(raw["category"]),
            rationale=str(raw["rationale"]),
            judge_id=str(raw["judge_id"]),
            compile_status=CompileStatus(raw["compile_status"]),
            s_judge=float(raw["s_judge"]),
            s_compile=float(raw["s_compile"]),
        )


def evaluate_actor(
    dataset: Dataset,
    compiler: CompilerConfig,
    gateway: ModelGateway,
    out_path: str | Path | None = None,
):
    """Run the actor over every record, score each attempt, aggregate a report.

    Returns an EvaluationReport; optionally writes one line per attempt to
    out_path (deterministic bytes: dataset order, fixed field order, no timings).
    """
    from cxxrepair import metrics  # local import: metrics also consumes our types

    attempts = []
    for record in dataset:
        task = RepairTask.from_record(record)
        patch = propose_patch(task, gateway)
        result = score(task, patch, compiler, gateway)
        attempts.append(
            ScoredAttempt(
                record_id=record.id,
                error_type=record.error_type,
                actor_id=patch.actor_id,
                fixed_source=patch.fixed_source,
                category=result.verdict.category,
                rationale=result.verdict.rationale,
                judge_id=result.verdict.judge_id,
                compile_status=result.compile_outcome.status,
                s_judge=result.reward.s_judge,
                s_compile=result.reward.s_compile,
            )
        )
    if out_path is not None:
        write_score_records(attempts, out_path)
    return metrics.build_evaluation_report(attempts)


def write_score_records(attempts: list[ScoredAttempt], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        for attempt in attempts:
            handle.write(json.dumps(attempt.to_dict(), ensure_ascii=False) + "\n")
    return path


def load_score_records(path: str | Path) -> list[ScoredAttempt]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"score file not found: {path}")
    attempts = []
    with path.open(encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                attempts.append(ScoredAttempt.from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise CorpusError(f"{path}:{line_no}: bad score record: {exc}") from exc
    return attempts

"""Dataset construction: seed augmentation, generate-and-verify, cross-compiler filtering.

Every candidate admitted to the dataset has been compiled (and failed) and
had its diagnostic confirmed against the target error by the validator judge,
so verified records re-verify when the pipeline is replayed.
"""

from __future__ import annotations

import hashlib
import json
import logging
import random
from dataclasses import dataclass
from pathlib import Path

from cxxrepair.compile_harness import CompileOutcome, CompilerConfig, CompileStatus, compile_source
from cxxrepair.corpus import Dataset, DatasetRecord, Provenance
from cxxrepair.errors import CorpusError, ForgeError, GatewayError, JudgeProtocolError
from cxxrepair.gateway import ModelGateway, ModelRole, extract_code, render_prompt

logger = logging.getLogger(__name__)

MATCH_TOKEN = "MATCH"
NO_MATCH_TOKEN = "NO_MATCH"
DEFAULT_AUGMENT_ATTEMPTS = 3
DEFAULT_JUDGE_RETRIES = 2


@dataclass(frozen=True)
class ErrorTarget:
    """Catalog reference for the compiler error a snippet is meant to trigger."""

    error_type: str
    error_number: str
    error_detail: str


@dataclass(frozen=True)
class SeedSnippet:
    target: ErrorTarget
    fragment: str
    origin: str

    def __post_init__(self):
        if not self.fragment:
            raise ValueError("seed fragment is empty")
        if not self.target.error_number:
            raise ValueError("seed target has no error number")


@dataclass
class VerificationResult:
    accepted: bool
    compile_outcome: CompileOutcome
    judge_match: bool
    judge_rationale: str


@dataclass(frozen=True)
class MsvcEvidence:
    in_seed_stats: bool
    in_generated_stats: bool
    llm_flagged_msvc_only: bool


def flag_msvc_specific(evidence: MsvcEvidence) -> bool:
    """True only when all three independent evidence signals agree."""
    return (
        evidence.in_seed_stats
        and evidence.in_generated_stats
        and evidence.llm_flagged_msvc_only
    )


def _parse_match_token(text: str) -> bool | None:
    """Read the verdict token from the final non-empty line; None when unparseable."""
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    if not lines:
        return None
    last = lines[-1]
    if last == MATCH_TOKEN:
        return True
    if last == NO_MATCH_TOKEN:
        return False
    return None


def verify_candidate(
    source: str,
    target: ErrorTarget,
    compiler: CompilerConfig,
    gateway: ModelGateway,
    judge_retries: int = DEFAULT_JUDGE_RETRIES,
) -> VerificationResult:
    """Compile the candidate and, only if compilation fails, ask the validator judge.

    A candidate is accepted when the compile fails AND the judge confirms the
    diagnostic matches the target error.
    """
    outcome = compile_source(source, compiler)
    if outcome.status is not CompileStatus.FAIL:
        return VerificationResult(
            accepted=False,
            compile_outcome=outcome,
            judge_match=False,
            judge_rationale=f"compile status {outcome.status.value}; judge not consulted",
        )
    template = gateway.template_for(ModelRole.VALIDATOR_JUDGE)
    prompt = render_prompt(
        template,
        {
            "error_type": target.error_type,
            "error_number": target.error_number,
            "error_detail": target.error_detail,
            "compiler_output": outcome.raw_stderr,
        },
    )
    for _ in range(judge_retries + 1):
        response = gateway.complete(prompt, ModelRole.VALIDATOR_JUDGE)
        verdict = _parse_match_token(response.text)
        if verdict is not None:
            return VerificationResult(
                accepted=verdict,
                compile_outcome=outcome,
                judge_match=verdict,
                judge_rationale=response.text,
            )
        logger.warning("validator judge response lacked a MATCH/NO_MATCH token, retrying")
    raise JudgeProtocolError(
        f"validator judge never answered with {MATCH_TOKEN} or {NO_MATCH_TOKEN} "
        f"on its final line after {judge_retries + 1} attempts"
    )


def record_id_for(target: ErrorTarget, source: str) -> str:
    digest = hashlib.sha256(source.encode("utf-8")).hexdigest()
    return f"{target.error_number}-{digest[:12]}"


def _record_from(
    target: ErrorTarget,
    source: str,
    verification: VerificationResult,
    provenance: Provenance,
) -> DatasetRecord:
    return DatasetRecord(
        id=record_id_for(target, source),
        error_type=target.error_type,
        error_number=target.error_number,
        error_detail=target.error_detail,
        buggy_source=source,
        compiler_message=verification.compile_outcome.raw_stderr,
        provenance=provenance,
        verified=True,
    )


def augment_snippet(
    seed: SeedSnippet,
    compiler: CompilerConfig,
    gateway: ModelGateway,
    max_attempts: int = DEFAULT_AUGMENT_ATTEMPTS,
) -> DatasetRecord:
    """Complete a seed fragment into a self-contained file that fails with its target error.

    A fragment that already verifies is returned unchanged. Otherwise the
    augmenter model is asked (up to max_attempts times) to add boilerplate;
    each attempt is re-verified before acceptance.
    """
    direct = verify_candidate(seed.fragment, seed.target, compiler, gateway)
    if direct.accepted:
        return _record_from(seed.target, seed.fragment, direct, Provenance.SEED)
    template = gateway.template_for(ModelRole.AUGMENTER)
    last: VerificationResult | None = None
    for attempt in range(1, max_attempts + 1):
        prompt = render_prompt(
            template,
            {
                "fragment": seed.fragment,
                "error_type": seed.target.error_type,
                "error_number": seed.target.error_number,
                "error_detail": seed.target.error_detail,
                "attempt": str(attempt),
            },
        )
        candidate = extract_code(gateway.complete(prompt, ModelRole.AUGMENTER).text)
        last = verify_candidate(candidate, seed.target, compiler, gateway)
        if last.accepted:
            return _record_from(seed.target, candidate, last, Provenance.SEED)
        logger.info(
            "augmentation attempt %d/%d for %s rejected (%s)",
            attempt, max_attempts, seed.target.error_number,
            last.compile_outcome.status.value,
        )
    assert last is not None
    if last.compile_outcome.status is CompileStatus.PASS:
        raise ForgeError(
            f"target error not triggered: augmented source for {seed.target.error_number} "
            f"({seed.origin}) compiles cleanly"
        )
    raise ForgeError(
        f"augmentation for {seed.target.error_number} ({seed.origin}) failed verification "
        f"after {max_attempts} attempts"
    )


def generate_candidates(target: ErrorTarget, k: int, gateway: ModelGateway) -> list[str]:
    """Ask the generator model for k snippet variants; exact duplicates are dropped."""
    if k < 0:
        raise ForgeError("candidate count must be non-negative")
    template = gateway.template_for(ModelRole.GENERATOR)
    sources: list[str] = []
    seen: set[str] = set()
    for variant in range(k):
        prompt = render_prompt(
            template,
            {
                "error_type": target.error_type,
                "error_number": target.error_number,
                "error_detail": target.error_detail,
                "variant": str(variant),
            },
        )
        try:
            response = gateway.complete(prompt, ModelRole.GENERATOR)
            source = extract_code(response.text)
        except (GatewayError, ValueError) as exc:
            raise ForgeError(f"candidate {variant} for {target.error_number}: {exc}") from exc
        if source not in seen:
            seen.add(source)
            sources.append(source)
    return sources


def build_synthetic_records(
    target: ErrorTarget,
    k: int,
    compiler: CompilerConfig,
    gateway: ModelGateway,
) -> list[DatasetRecord]:
    """Generate-and-verify loop: admit only candidates that fail compilation
    with a judge-confirmed match of the target error."""
    records = []
    for source in generate_candidates(target, k, gateway):
        result = verify_candidate(source, target, compiler, gateway)
        if result.accepted:
            records.append(_record_from(target, source, result, Provenance.SYNTHETIC))
        else:
            logger.info(
                "candidate for %s rejected: %s",
                target.error_number,
                "clean compile" if result.compile_outcome.status is CompileStatus.PASS
                else "judge mismatch",
            )
    return records


def filter_dataset(dataset: Dataset, flags: dict[str, bool]) -> Dataset:
    """Drop records whose error_type is flagged compiler-specific; order preserved."""
    kept = [record for record in dataset if not flags.get(record.error_type, False)]
    return Dataset(records=kept)


def export_review_sample(dataset: Dataset, n: int, seed: int, out_path: str | Path) -> Path:
    """Write a human-readable review file with n uniformly sampled records.

    Output is byte-deterministic for a fixed (dataset, n, seed).
    """
    if n > len(dataset):
        raise ForgeError(f"review sample size {n} exceeds dataset size {len(dataset)}")
    rng = random.Random(seed)
    indices = sorted(rng.sample(range(len(dataset)), n))
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    lines = [
        f"# manual review sample: {n} of {len(dataset)} records (seed={seed})",
        "",
    ]
    for index in indices:
        record = dataset[index]
        lines.append(f"== record {record.id}")
        lines.append(f"error_type:   {record.error_type}")
        lines.append(f"error_number: {record.error_number}")
        lines.append(f"error_detail: {record.error_detail}")
        lines.append(f"difficulty:   {record.difficulty.value}")
        lines.append(f"provenance:   {record.provenance.value}")
        lines.append(f"verified:     {record.verified}")
        lines.append("--- source ---")
        lines.extend(f"    {line}" for line in record.buggy_source.splitlines())
        lines.append("--- diagnostics ---")
        lines.extend(f"    {line}" for line in record.compiler_message.splitlines())
        lines.append("")
    out_path.write_text("\n".join(lines), encoding="utf-8")
    return out_path


def load_seed_snippets(path: str | Path) -> list[SeedSnippet]:
    """Read seed fragments from a line-delimited file.

    Fields: target_error_type, target_error_number, target_error_detail,
    fragment, origin.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"seed file not found: {path}")
    seeds = []
    with path.open(encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
                seeds.append(
                    SeedSnippet(
                        target=ErrorTarget(
                            error_type=str(raw["target_error_type"]),
                            error_number=str(raw["target_error_number"]),
                            error_detail=str(raw["target_error_detail"]),
                        ),
                        fragment=str(raw["fragment"]),
                        origin=str(raw.get("origin", "")),
                    )
                )
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise CorpusError(f"{path}:{line_no}: bad seed record: {exc}") from exc
    return seeds


def load_msvc_evidence(path: str | Path) -> dict[str, MsvcEvidence]:
    """Read per-error-type evidence booleans from a line-delimited file."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"evidence file not found: {path}")
    evidence = {}
    with path.open(encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
                evidence[str(raw["error_type"])] = MsvcEvidence(
                    in_seed_stats=bool(raw["in_seed_stats"]),
                    in_generated_stats=bool(raw["in_generated_stats"]),
                    llm_flagged_msvc_only=bool(raw["llm_flagged_msvc_only"]),
                )
            except (json.JSONDecodeError, KeyError) as exc:
                raise CorpusError(f"{path}:{line_no}: bad evidence record: {exc}") from exc
    return evidence


def evidence_flags(evidence: dict[str, MsvcEvidence]) -> dict[str, bool]:
    return {error_type: flag_msvc_specific(item) for error_type, item in evidence.items()}

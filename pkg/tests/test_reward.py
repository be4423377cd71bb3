import json

import pytest

from cxxrepair.compile_harness import CompilerConfig, CompileStatus
from cxxrepair.corpus import load_dataset
from cxxrepair.errors import CompilerToolError, CorpusError, JudgeProtocolError
from cxxrepair.gateway import GatewayMode, ModelGateway, ModelRole
from cxxrepair.reward import (
    PatchProposal,
    RepairTask,
    ScoredAttempt,
    Verdict,
    VerdictCategory,
    compute_reward,
    evaluate_actor,
    judge_fix,
    load_score_records,
    parse_verdict,
    propose_patch,
    score,
    write_score_records,
)
from test_forge import ScriptedGateway

TASK = RepairTask(
    record_id="t1",
    buggy_source="int main() { int x = 1\n}",
    compiler_message="snippet.cpp:1:24: error: expected ',' or ';' before '}' token",
)


def verdict(category: VerdictCategory) -> Verdict:
    return Verdict(category=category, rationale="r", judge_id="j")


# ------------------------------------------------------------ verdict parse


def test_parse_verdict_each_label():
    for category in VerdictCategory:
        parsed = parse_verdict(f"{category.name}: because of reasons", "j1")
        assert parsed.category is category
        assert parsed.rationale == "because of reasons"
        assert parsed.judge_id == "j1"


def test_parse_verdict_without_colon():
    parsed = parse_verdict("GENUINE_FIX the change restores the call", "j")
    assert parsed.category is VerdictCategory.GENUINE_FIX
    assert parsed.rationale == "the change restores the call"


def test_parse_verdict_requires_exactly_one_token():
    with pytest.raises(JudgeProtocolError, match="no category token"):
        parse_verdict("looks good to me", "j")
    with pytest.raises(JudgeProtocolError, match="2 category tokens"):
        parse_verdict("GENUINE_FIX or maybe INVALID_FIX", "j")


def test_parse_verdict_ignores_partial_words():
    # substrings inside identifiers must not count as label tokens
    parsed = parse_verdict("label GENUINE_FIXES is not a token, INVALID_FIX: yes", "j")
    assert parsed.category is VerdictCategory.INVALID_FIX


# ------------------------------------------------------------- gated reward


def test_compute_reward_full_table():
    for category in VerdictCategory:
        for compiled in (False, True):
            breakdown = compute_reward(verdict(category), compiled)
            if category is VerdictCategory.GENUINE_FIX:
                assert breakdown.s_judge == 0.5
                assert breakdown.s_compile == (0.5 if compiled else 0.0)
            else:
                assert breakdown.s_judge == 0.0
                assert breakdown.s_compile == 0.0
            assert breakdown.total in (0.0, 0.5, 1.0)


def test_compile_half_is_gated_on_judge():
    # a compiling patch earns nothing when the judge rejects it
    rejected = compute_reward(verdict(VerdictCategory.TRIVIAL_DELETION), compiled=True)
    assert rejected.total == 0.0


# -------------------------------------------------------------------- judge


def test_judge_fix_parses_response():
    gw = ScriptedGateway(
        {ModelRole.SEMANTIC_JUDGE: ["GENUINE_FIX: adds the missing semicolon"]}
    )
    result = judge_fix(TASK, PatchProposal(task_id="t1", fixed_source="x"), gw)
    assert result.category is VerdictCategory.GENUINE_FIX
    assert result.judge_id == "scripted-semantic_judge"
    role, prompt = gw.prompts[0]
    assert TASK.buggy_source in prompt
    assert TASK.compiler_message in prompt


def test_judge_fix_retries_then_succeeds():
    gw = ScriptedGateway(
        {ModelRole.SEMANTIC_JUDGE: ["unparseable", "TRIVIAL_DELETION: drops the body"]}
    )
    result = judge_fix(TASK, PatchProposal(task_id="t1", fixed_source="x"), gw, retries=1)
    assert result.category is VerdictCategory.TRIVIAL_DELETION
    assert len(gw.prompts) == 2


def test_judge_fix_protocol_exhaustion():
    gw = ScriptedGateway({ModelRole.SEMANTIC_JUDGE: ["?", "?", "?"]})
    with pytest.raises(JudgeProtocolError, match="after 3 attempts"):
        judge_fix(TASK, PatchProposal(task_id="t1", fixed_source="x"), gw, retries=2)


# -------------------------------------------------------------------- score


def test_score_genuine_and_compiling():
    gw = ScriptedGateway({ModelRole.SEMANTIC_JUDGE: ["GENUINE_FIX: fixed"]})
    patch = PatchProposal(task_id="t1", fixed_source="int main() { return 0; }")
    result = score(TASK, patch, CompilerConfig(), gw)
    assert result.reward.total == 1.0
    assert result.compile_outcome.status is CompileStatus.PASS


def test_score_genuine_but_broken_patch():
    gw = ScriptedGateway({ModelRole.SEMANTIC_JUDGE: ["GENUINE_FIX: fixed"]})
    patch = PatchProposal(task_id="t1", fixed_source="int main() { int y = 2\n}")
    result = score(TASK, patch, CompilerConfig(), gw)
    assert result.reward.total == 0.5
    assert result.compile_outcome.status is CompileStatus.FAIL


def test_score_tool_error_aborts():
    gw = ScriptedGateway({ModelRole.SEMANTIC_JUDGE: ["GENUINE_FIX: fixed"]})
    patch = PatchProposal(task_id="t1", fixed_source="int main() { return 0; }")
    with pytest.raises(CompilerToolError, match="t1"):
        score(TASK, patch, CompilerConfig(compiler_path="/nonexistent/gxx"), gw)


def test_propose_patch_extracts_code():
    gw = ScriptedGateway({ModelRole.ACTOR: ["sure!\n```cpp\nint main() { return 0; }\n```"]})
    patch = propose_patch(TASK, gw)
    assert patch.fixed_source == "int main() { return 0; }"
    assert patch.task_id == "t1"
    assert patch.actor_id == "scripted-actor"


# ------------------------------------------------------------ score records


def make_attempt(i: int = 0, **overrides) -> ScoredAttempt:
    values = dict(
        record_id=f"r{i}",
        error_type="syntax_error",
        actor_id="actor-1",
        fixed_source="int main() { return 0; }",
        category=VerdictCategory.GENUINE_FIX,
        rationale="ok",
        judge_id="judge-1",
        compile_status=CompileStatus.PASS,
        s_judge=0.5,
        s_compile=0.5,
    )
    values.update(overrides)
    return ScoredAttempt(**values)


def test_scored_attempt_round_trip(tmp_path):
    attempts = [
        make_attempt(0),
        make_attempt(
            1,
            category=VerdictCategory.INVALID_FIX,
            compile_status=CompileStatus.FAIL,
            s_judge=0.0,
            s_compile=0.0,
        ),
    ]
    path = write_score_records(attempts, tmp_path / "scores.jsonl")
    assert load_score_records(path) == attempts
    assert attempts[0].total == 1.0
    assert attempts[1].total == 0.0
    assert attempts[0].compiled and not attempts[1].compiled


def test_load_score_records_rejects_garbage(tmp_path):
    path = tmp_path / "scores.jsonl"
    path.write_text('{"record_id": "x"}\n')
    with pytest.raises(CorpusError, match=":1:"):
        load_score_records(path)
    with pytest.raises(FileNotFoundError):
        load_score_records(tmp_path / "absent.jsonl")


def test_evaluate_actor_replay(tmp_path, fixtures_dir):
    dataset = load_dataset(fixtures_dir / "eval_dataset.jsonl")
    gw = ModelGateway(mode=GatewayMode.REPLAY, fixtures_dir=fixtures_dir / "gateway")
    out = tmp_path / "scores.jsonl"
    report = evaluate_actor(dataset, CompilerConfig(), gw, out_path=out)
    assert report.n == 4
    assert report.csr == 50.0
    assert report.gfr == 50.0
    assert report.quality_distribution == {
        "genuine_fix": 2,
        "trivial_deletion": 1,
        "excessive_modification": 0,
        "invalid_fix": 1,
    }
    attempts = load_score_records(out)
    assert [a.record_id for a in attempts] == dataset.ids()
    assert sorted(a.total for a in attempts) == [0.0, 0.0, 0.5, 1.0]

import subprocess

import pytest

from cxxrepair import compile_harness
from cxxrepair.compile_harness import (
    CompilerConfig,
    CompileStatus,
    Severity,
    batch_compile,
    compile_source,
    parse_diagnostics,
)

GOOD = "int main() { return 0; }\n"
BROKEN = "int main() { int x = 1\n    return x;\n}\n"


def test_pass():
    outcome = compile_source(GOOD)
    assert outcome.status is CompileStatus.PASS
    assert outcome.error_diagnostics() == []
    assert outcome.duration > 0


def test_fail_with_parsed_error():
    outcome = compile_source(BROKEN)
    assert outcome.status is CompileStatus.FAIL
    errors = outcome.error_diagnostics()
    assert len(errors) >= 1
    assert errors[0].file == "snippet.cpp"
    assert errors[0].line >= 1
    assert outcome.raw_stderr


def test_stderr_is_stable_across_runs():
    # downstream replay keys hash this text, so it must not embed temp paths
    first = compile_source(BROKEN)
    second = compile_source(BROKEN)
    assert first.raw_stderr == second.raw_stderr


def test_warning_does_not_affect_status():
    source = "int f() { int unused = 1; return 0; }\n"
    config = CompilerConfig(extra_flags=["-Wall"])
    outcome = compile_source(source, config)
    assert outcome.status is CompileStatus.PASS
    assert any(d.severity is Severity.WARNING for d in outcome.diagnostics)


def test_compile_only_accepts_snippets_without_main():
    outcome = compile_source("int helper(int a) { return a + 1; }\n")
    assert outcome.status is CompileStatus.PASS


def test_tool_error_for_missing_compiler():
    config = CompilerConfig(compiler_path="/nonexistent/gxx-binary")
    outcome = compile_source(GOOD, config)
    assert outcome.status is CompileStatus.TOOL_ERROR
    assert "cannot start compiler" in outcome.raw_stderr


def test_timeout(monkeypatch):
    def fake_spawn(cmd, cwd, timeout):
        raise subprocess.TimeoutExpired(cmd=cmd, timeout=timeout, stderr=b"partial output")

    monkeypatch.setattr(compile_harness, "_spawn", fake_spawn)
    outcome = compile_source(GOOD, CompilerConfig(timeout=0.5))
    assert outcome.status is CompileStatus.TIMEOUT
    assert outcome.raw_stderr == "partial output"


def test_config_env_fallback(monkeypatch):
    monkeypatch.setenv("CXXREPAIR_COMPILER", "/custom/path/g++")
    assert CompilerConfig().compiler_path == "/custom/path/g++"


def test_config_validation():
    with pytest.raises(ValueError):
        CompilerConfig(timeout=0)
    with pytest.raises(ValueError):
        CompilerConfig(max_parallel=0)


def test_batch_alignment():
    sources = [GOOD, BROKEN, GOOD, BROKEN]
    outcomes = batch_compile(sources, CompilerConfig(max_parallel=2))
    assert [o.status for o in outcomes] == [
        CompileStatus.PASS,
        CompileStatus.FAIL,
        CompileStatus.PASS,
        CompileStatus.FAIL,
    ]
    assert batch_compile([]) == []


def test_batch_isolates_tool_errors():
    config = CompilerConfig(compiler_path="/nonexistent/gxx-binary", max_parallel=2)
    outcomes = batch_compile([GOOD, GOOD], config)
    assert [o.status for o in outcomes] == [CompileStatus.TOOL_ERROR, CompileStatus.TOOL_ERROR]


# ------------------------------------------------------------- diagnostics


def test_parse_diagnostics_severities():
    raw = "\n".join(
        [
            "snippet.cpp:3:10: error: expected ';' before 'return'",
            "snippet.cpp:1:5: warning: unused variable 'x' [-Wunused-variable]",
            "snippet.cpp:2:1: note: declared here",
            "snippet.cpp:9:1: fatal error: climits: No such file or directory",
            "compilation terminated.",
            "some unrelated line",
        ]
    )
    parsed = parse_diagnostics(raw)
    assert [d.severity for d in parsed] == [
        Severity.ERROR,
        Severity.WARNING,
        Severity.NOTE,
        Severity.ERROR,
    ]
    assert parsed[0].line == 3
    assert parsed[0].column == 10
    assert parsed[0].message == "expected ';' before 'return'"


def test_parse_diagnostics_without_column():
    parsed = parse_diagnostics("prog.cpp:12: error: something bad")
    assert len(parsed) == 1
    assert parsed[0].column is None
    assert parsed[0].line == 12


def test_parse_diagnostics_ignores_noise():
    assert parse_diagnostics("") == []
    assert parse_diagnostics("In file included from snippet.cpp:1:") == []

"""Run a C++ compiler on source snippets in isolated temp dirs and parse its diagnostics.

Compilation is compile-only (no linking), so snippets without main() still
verify.  Sources are written under a fresh temporary directory and the
compiler is invoked with a relative filename and a C locale: diagnostic text
then depends only on the source and the toolchain, which keeps downstream
replay fixtures stable.
"""

from __future__ import annotations

import os
import re
import shutil
import subprocess
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

COMPILER_ENV_VAR = "CXXREPAIR_COMPILER"
SOURCE_FILENAME = "snippet.cpp"
OBJECT_FILENAME = "snippet.o"


class CompileStatus(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    TIMEOUT = "timeout"
    TOOL_ERROR = "tool_error"


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"
    NOTE = "note"


@dataclass(frozen=True)
class Diagnostic:
    file: str
    line: int
    column: int | None
    severity: Severity
    message: str

    def to_dict(self) -> dict:
        return {
            "file": self.file,
            "line": self.line,
            "column": self.column,
            "severity": self.severity.value,
            "message": self.message,
        }


@dataclass
class CompilerConfig:
    compiler_path: str = field(
        default_factory=lambda: os.environ.get(COMPILER_ENV_VAR, "g++")
    )
    language_standard: str = "c++17"
    extra_flags: list[str] = field(default_factory=list)
    timeout: float = 10.0
    max_parallel: int = field(default_factory=lambda: os.cpu_count() or 1)

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.max_parallel < 1:
            raise ValueError("max_parallel must be at least 1")


@dataclass
class CompileOutcome:
    status: CompileStatus
    diagnostics: list[Diagnostic]
    raw_stderr: str
    duration: float

    def error_diagnostics(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.severity is Severity.ERROR]


# GCC-style "file:line:col: severity: message"; the column is optional.
_DIAGNOSTIC_RE = re.compile(
    r"^(?P<file>[^\s:][^:]*):(?P<line>\d+):(?:(?P<column>\d+):)?\s*"
    r"(?P<severity>fatal error|error|warning|note):\s*(?P<message>.*)$"
)


def parse_diagnostics(raw_stderr: str) -> list[Diagnostic]:
    """Extract diagnostics from compiler stderr; non-matching lines are ignored."""
    diagnostics = []
    for line in raw_stderr.splitlines():
        match = _DIAGNOSTIC_RE.match(line)
        if not match:
            continue
        severity = match.group("severity")
        diagnostics.append(
            Diagnostic(
                file=match.group("file"),
                line=int(match.group("line")),
                column=int(match.group("column")) if match.group("column") else None,
                severity=Severity.ERROR if severity == "fatal error" else Severity(severity),
                message=match.group("message"),
            )
        )
    return diagnostics


def _spawn(cmd: list[str], cwd: str, timeout: float) -> subprocess.CompletedProcess:
    # C locale keeps diagnostic wording independent of the host configuration.
    env = dict(os.environ, LC_ALL="C", LANG="C")
    return subprocess.run(
        cmd, cwd=cwd, env=env, capture_output=True, text=True, timeout=timeout
    )


def compile_source(source: str, config: CompilerConfig | None = None) -> CompileOutcome:
    """Compile one snippet to an object file and report pass/fail/timeout/tool_error.

    Warnings never affect the status; only the compiler exit code does.
    """
    config = config or CompilerConfig()
    workdir = tempfile.mkdtemp(prefix="cxxrepair-")
    started = time.monotonic()
    try:
        with open(os.path.join(workdir, SOURCE_FILENAME), "w", encoding="utf-8") as handle:
            handle.write(source)
        cmd = [
            config.compiler_path,
            "-c",
            f"-std={config.language_standard}",
            *config.extra_flags,
            SOURCE_FILENAME,
            "-o",
            OBJECT_FILENAME,
        ]
        try:
            proc = _spawn(cmd, cwd=workdir, timeout=config.timeout)
        except subprocess.TimeoutExpired as exc:
            stderr = exc.stderr
            if isinstance(stderr, bytes):
                stderr = stderr.decode("utf-8", errors="replace")
            stderr = stderr or ""
            return CompileOutcome(
                status=CompileStatus.TIMEOUT,
                diagnostics=parse_diagnostics(stderr),
                raw_stderr=stderr,
                duration=time.monotonic() - started,
            )
        except (FileNotFoundError, PermissionError, OSError) as exc:
            return CompileOutcome(
                status=CompileStatus.TOOL_ERROR,
                diagnostics=[],
                raw_stderr=f"cannot start compiler {config.compiler_path!r}: {exc}",
                duration=time.monotonic() - started,
            )
        stderr = proc.stderr or ""
        if proc.returncode == 0:
            status = CompileStatus.PASS
        else:
            status = CompileStatus.FAIL
            if not stderr:
                stderr = f"compiler exited with status {proc.returncode} and produced no diagnostics"
        return CompileOutcome(
            status=status,
            diagnostics=parse_diagnostics(stderr),
            raw_stderr=stderr,
            duration=time.monotonic() - started,
        )
    finally:
        shutil.rmtree(workdir, ignore_errors=True)


def batch_compile(sources: list[str], config: CompilerConfig | None = None) -> list[CompileOutcome]:
    """Compile many snippets with at most config.max_parallel concurrent compiler processes.

    Outcomes are positionally aligned with the inputs; a per-item tool_error
    is reported in its slot without aborting the batch.
    """
    config = config or CompilerConfig()
    if not sources:
        return []
    with ThreadPoolExecutor(max_workers=config.max_parallel) as pool:
        return list(pool.map(lambda source: compile_source(source, config), sources))

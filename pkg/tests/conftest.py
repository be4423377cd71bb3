import re
from pathlib import Path

import pytest

FIXTURES_DIR = Path(__file__).parent / "fixtures"

_CRITERION_RE = re.compile(r"test_criterion_(\d+)_(\w+)")


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES_DIR


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance criterion at the end of the run."""
    results: dict[int, tuple[str, str]] = {}
    for status, verdict in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL")):
        for report in terminalreporter.stats.get(status, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance.py" not in nodeid:
                continue
            match = _CRITERION_RE.search(nodeid.split("::")[-1])
            if not match:
                continue
            number = int(match.group(1))
            label = match.group(2).replace("_", " ")
            if number not in results or verdict == "FAIL":
                results[number] = (label, verdict)
    if not results:
        return
    terminalreporter.write_line("")
    terminalreporter.write_line("acceptance criteria:")
    for number in sorted(results):
        label, verdict = results[number]
        terminalreporter.write_line(f"  criterion {number:02d} ({label}): {verdict}")

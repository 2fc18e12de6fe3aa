"""Shared fixtures; collects one summary line per acceptance criterion."""
import re

import pytest


def pytest_configure(config):
    config._acceptance_lines = {}


@pytest.fixture
def acceptance(request):
    """Record ``(criterion, passed, detail)``; printed at the end of the run."""

    def record(criterion: str, passed: bool, detail: str) -> str:
        line = f"{criterion} {'PASS' if passed else 'FAIL'} {detail}"
        request.config._acceptance_lines[criterion] = line
        print(line)
        return line

    return record


def _order(key):
    m = re.match(r"AC(\d+)", key)
    return (int(m.group(1)) if m else 99, key)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", {})
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(lines, key=_order):
        terminalreporter.write_line(lines[key])

"""Shared pytest plumbing: the acceptance-criteria summary block.

Acceptance tests register one line per criterion through the
``acceptance_log`` fixture; the terminal summary prints them all in
order, whether the run passed or failed.
"""

import pytest


def pytest_configure(config):
    config._acceptance_lines = {}


@pytest.fixture()
def acceptance_log(request):
    """Callable (criterion, passed, detail) -> None recording one line."""

    lines = request.config._acceptance_lines

    def record(criterion: int, passed: bool, detail: str = "") -> None:
        lines[int(criterion)] = (bool(passed), str(detail))

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(lines):
        passed, detail = lines[criterion]
        status = "PASS" if passed else "FAIL"
        text = f"[criterion {criterion}] {status}"
        if detail:
            text = f"{text} {detail}"
        terminalreporter.write_line(text)

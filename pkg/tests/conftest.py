import re

import pytest

_CRITERION = re.compile(r"test_criterion_(\d+)_")
_results: dict[int, dict] = {}


@pytest.fixture
def note(request):
    """Attach a one-line measurement summary to an acceptance criterion."""
    def add(text: str):
        request.node.user_properties.append(("detail", text))
    return add


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m or "test_acceptance.py" not in report.nodeid:
        return
    num = int(m.group(1))
    entry = _results.setdefault(num, {"outcome": "passed", "details": []})
    if report.when == "call" or report.failed:
        if report.failed:
            entry["outcome"] = "failed"
        elif report.skipped:
            entry["outcome"] = "skipped"
        entry["details"] = [v for k, v in report.user_properties if k == "detail"]


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for num in sorted(_results):
        entry = _results[num]
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[entry["outcome"]]
        detail = "; ".join(entry["details"])
        tr.write_line(f"criterion {num:2d}: {status}" + (f"  ({detail})" if detail else ""))

import re

import pytest

CRITERIA = {
    1: "exact lemma suite: Carleson bound",
    2: "transform identity",
    3: "dyadic weak-type maximal bound, constant 1",
    4: "sparseness verification",
    5: "principal cube / corona / Whitney conditions",
    6: "sharpness sweep slopes",
    7: "theorem ratio budget",
    8: "testing-condition safe directions",
    9: "determinism",
    10: "full default run time",
}

_outcomes = {}
_details = {}


@pytest.fixture(scope="session")
def acceptance_log():
    def log(num: int, detail: str) -> None:
        _details[num] = detail
    return log


def pytest_runtest_logreport(report):
    m = re.search(r"test_criterion_(\d+)", report.nodeid)
    if not m:
        return
    num = int(m.group(1))
    if report.when == "call" or report.outcome != "passed":
        _outcomes[num] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for num, name in CRITERIA.items():
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}.get(_outcomes.get(num), "NOT RUN")
        detail = _details.get(num, "")
        terminalreporter.write_line(f"criterion {num:2d} {status:7s} {name}" + (f": {detail}" if detail else ""))

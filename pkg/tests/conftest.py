import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

CRITERIA = {
    1: "DHV corner determinants and Chen-S",
    2: "push-started Lu-Kumar corner determinants and culprit",
    3: "Lu-Kumar corner determinants and verdicts",
    4: "DHV region scans (all Chen-S vs mixed)",
    5: "reflection combination identity on neighbor pairs",
    6: "Chen-S along neighbor segments",
    7: "SSC feasibility LP",
    8: "trajectory cross-checks",
}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion the test belongs to")
    config._criteria = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n = mark.args[0]
    ok = rep.passed or (rep.when != "call" and not rep.failed)
    results = item.config._criteria.setdefault(n, [])
    if rep.when == "call" or rep.failed:
        results.append((item.name, ok))


def pytest_terminal_summary(terminalreporter, config):
    results = getattr(config, "_criteria", {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        if n not in results:
            continue
        failed = [name for name, ok in results[n] if not ok]
        status = "FAIL" if failed else "PASS"
        line = f"criterion {n}: {status}  {CRITERIA[n]}"
        if failed:
            line += "  (failed: " + ", ".join(failed) + ")"
        terminalreporter.write_line(line)

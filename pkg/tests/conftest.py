"""Per-criterion reporting for the acceptance suite.

Tests marked ``@pytest.mark.criterion(n)`` are grouped by ``n``; at the end
of the session one PASS/FAIL line is printed per criterion together with
the measured values each test attached through ``record_property``.
"""

from collections import defaultdict

import pytest

_results = defaultdict(list)


def pytest_collection_modifyitems(items):
    # Criteria 1-7 optimize; ``-m "not slow"`` leaves the fast suite.
    for item in items:
        marker = item.get_closest_marker("criterion")
        if marker is not None and marker.args[0] != 8:
            item.add_marker(pytest.mark.slow)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        details = [f"{k}={v}" for k, v in item.user_properties]
        _results[marker.args[0]].append((item.name, rep.passed, rep.skipped, details))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_results):
        rows = _results[n]
        ran = [r for r in rows if not r[2]]
        ok = sum(r[1] for r in ran)
        status = "PASS" if ran and ok == len(ran) else ("SKIP" if not ran else "FAIL")
        tr.write_line(f"criterion {n}: {status} ({ok}/{len(ran)} checks passed)")
        for name, passed, skipped, details in rows:
            flag = "skip" if skipped else ("ok" if passed else "FAILED")
            tr.write_line(f"    {flag:6} {name} {' '.join(details)}")

"""Prints one PASS/FAIL line per numbered acceptance criterion."""

import pytest

_acceptance: dict = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(n): numbered acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    out = yield
    rep = out.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    n = mark.args[0]
    if rep.when == "call":
        _acceptance[n] = rep.passed
    elif not rep.passed:
        _acceptance[n] = False


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    for n in sorted(_acceptance):
        word = "PASS" if _acceptance[n] else "FAIL"
        terminalreporter.write_line(f"ACCEPTANCE {n}: {word}")

"""Pytest configuration for the figure-rendering package.

Mirrors the experiment package's convention: tests marked
``@pytest.mark.acceptance("<name>")`` are the release gate, each reported
as one ``ACCEPTANCE <name>: PASS|FAIL`` line in the terminal summary.
The stash key here is distinct from the experiment package's, so running
both test trees together prints each package's criteria in its own
section.
"""

import pytest


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "acceptance(name): release-gate criterion; reported as one PASS/FAIL "
        "line in the terminal summary",
    )


_ACCEPTANCE_KEY = pytest.StashKey()


def _criterion_name(item):
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return None
    return marker.args[0] if marker.args else item.name


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    name = _criterion_name(item)
    if name is not None and report.when == "call":
        results = item.config.stash.setdefault(_ACCEPTANCE_KEY, {})
        results[name] = report.passed


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(_ACCEPTANCE_KEY, None)
    if not results:
        return
    terminalreporter.section("acceptance criteria (figure rendering)")
    for name, passed in results.items():
        terminalreporter.write_line(f"ACCEPTANCE {name}: {'PASS' if passed else 'FAIL'}")

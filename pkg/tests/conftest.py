import functools

import pytest

from circletrack.harness import run_scenario


@functools.lru_cache(maxsize=None)
def _cached_run(cfg):
    return tuple(run_scenario(cfg))


@pytest.fixture(scope="session")
def simulate():
    """Run a scenario once per session; configs are hashable frozen dataclasses."""
    return _cached_run


# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")

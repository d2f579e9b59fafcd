import os

import pytest

_RESULTS = []


class Verdicts:
    """Collects one PASS/FAIL line per acceptance criterion for the terminal summary."""

    def record(self, number, ok, detail):
        line = f"CRITERION {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        _RESULTS.append((number, line))
        print("\n" + line)
        return ok


@pytest.fixture(scope="session")
def verdicts():
    return Verdicts()


@pytest.fixture(scope="session")
def full_scale():
    return os.environ.get("LAYERED_GAS_FULL", "") not in ("", "0")


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_RESULTS, key=lambda r: r[0]):
        terminalreporter.write_line(line)

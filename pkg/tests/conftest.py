import re

import pytest

from ring_resilience.geometry import Circle, Scenario


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion at the end of the run."""
    lines = []
    for status in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(status, []):
            m = re.search(
                r"test_acceptance\.py::test_criterion_(\d+)_(\w+)", rep.nodeid
            )
            if m:
                word = "PASS" if status == "passed" else "FAIL"
                lines.append(
                    (
                        int(m.group(1)),
                        f"{word} criterion {m.group(1)}: "
                        f"{m.group(2).replace('_', ' ')}",
                    )
                )
    if lines:
        terminalreporter.write_line("")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)


@pytest.fixture
def unit_square() -> Scenario:
    """Four circles on an axis-aligned square, a 4-cycle communication graph.

    Solves to f = (0, pi, pi, 0), g = (+1, -1, +1, -1); two rings of
    length 4*pi. Used as the hand-checked reference system throughout.
    """
    d = 2.2
    return Scenario(
        4,
        0.5,
        (Circle(0, 0.0, 0.0), Circle(1, d, 0.0), Circle(2, d, d), Circle(3, 0.0, d)),
    )


@pytest.fixture
def two_chain() -> Scenario:
    return Scenario(2, 0.5, (Circle(0, 0.0, 0.0), Circle(1, 2.2, 0.0)))

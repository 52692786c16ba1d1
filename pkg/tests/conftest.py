from fractions import Fraction

import pytest

from fracphi.homogeneity import SKNumber
from fracphi.rulegen import generate

S = Fraction(9, 10)


@pytest.fixture(scope="session")
def negative_trees():
    return list(generate(S, SKNumber()))


@pytest.fixture(scope="session")
def trees_2s():
    return generate(S, SKNumber(0, 2, 0))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

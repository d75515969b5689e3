from __future__ import annotations

import pytest

from multiway import ExtendedSystem, evolve, iterate_homotopy, parse_rules
from multiway.homotopy import HomotopyLimits

SOURCE, TARGET = "AA", "ABBBABBB"
LIMITS = HomotopyLimits(max_len=6)


@pytest.fixture(scope="session")
def base():
    return parse_rules("A -> AB\n")


@pytest.fixture(scope="session")
def order2(base):
    return iterate_homotopy(ExtendedSystem.from_base(base), SOURCE, TARGET, 2, LIMITS)


@pytest.fixture(scope="session")
def order3(base):
    return iterate_homotopy(ExtendedSystem.from_base(base), SOURCE, TARGET, 3, LIMITS)


@pytest.fixture(scope="session")
def graph2(order2):
    return evolve([SOURCE], order2.combined, 6)

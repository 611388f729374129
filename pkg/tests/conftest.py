from __future__ import annotations

import sys

import pytest

from knvertex.fock import FockSpace
from knvertex.surface import genus0_model, genus1_model


@pytest.fixture(scope="session")
def g0():
    return genus0_model()


@pytest.fixture(scope="session")
def g1():
    return genus1_model()


@pytest.fixture(scope="session")
def space0(g0):
    return FockSpace(g0, 4)


@pytest.fixture(scope="session")
def space1(g1):
    return FockSpace(g1, 3)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(lines):
        terminalreporter.write_line(lines[num])

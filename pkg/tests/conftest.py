from fractions import Fraction as F

import pytest

from bakerakhiezer.bafunc import construct_ba_linear
from bakerakhiezer.rootdata import build_root_datum


@pytest.fixture(scope="session")
def a1():
    return {m: build_root_datum("b", "A", 1, [m]) for m in (0, 1, 2, 3)}


@pytest.fixture(scope="session")
def psi_a1(a1):
    return {m: construct_ba_linear(d) for m, d in a1.items()}


@pytest.fixture(scope="session")
def a2():
    return build_root_datum("b", "A", 2, [1])


@pytest.fixture(scope="session")
def psi_a2(a2):
    return construct_ba_linear(a2)


@pytest.fixture(scope="session")
def c1():
    return build_root_datum("c", "C", 1, [F(1, 2), 0, F(1, 2), 0, 0])


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance") or __import__("sys").modules.get("tests.test_acceptance")
    if mod is None or not mod.LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted((k for k in mod.LINES if k != "x"), key=int):
        terminalreporter.write_line(mod.LINES[k])
    if "x" in mod.LINES:
        terminalreporter.write_line(mod.LINES["x"])

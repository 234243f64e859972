from fractions import Fraction

import pytest

from pdholonomy.closure import closure
from pdholonomy.model import generator_set
from pdholonomy.skeleton import build_image_system

REPRESENTATIVES = (Fraction(3), Fraction(7, 2), Fraction(4), Fraction(5))

# acceptance lines, filled in by tests/test_acceptance.py
ACCEPTANCE: dict[str, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def gens12():
    return generator_set(Fraction(7, 2), (1, 2))


@pytest.fixture(scope="session")
def sg12(gens12):
    return closure(gens12)


@pytest.fixture(scope="session")
def sys12(sg12):
    return build_image_system(sg12)


@pytest.fixture(scope="session")
def sg1():
    return closure(generator_set(Fraction(7, 2), (1,)))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE, key=lambda k: (int(k.split()[0].rstrip("abcde")), k)):
        ok, detail = ACCEPTANCE[name]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")

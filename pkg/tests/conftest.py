from fractions import Fraction

import pytest
from hypothesis import settings

from kmslat.lattice import DilationSystem
from kmslat.measures import Atomic

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

MATRICES = {
    "two": [[2]],
    "diag23": [[2, 0], [0, 3]],
    "unipotent": [[1, 1], [0, 1]],
    "rot2": [[0, -2], [1, 0]],
}


@pytest.fixture(scope="session")
def systems():
    return {name: DilationSystem.from_matrix(A) for name, A in MATRICES.items()}


def sys_of(A):
    return DilationSystem.from_matrix(A)


def delta_at(*q):
    return Atomic.point(tuple(Fraction(x) for x in q))


def two_atoms(d):
    """1/3 at (1/3, 1/3, ...) and 2/3 at (1/4, 1/2, 1/4, ...)."""
    q1 = tuple(Fraction(1, 3) for _ in range(d))
    q2 = tuple(Fraction(1, 4) if i % 2 == 0 else Fraction(1, 2) for i in range(d))
    return Atomic(((Fraction(1, 3), q1), (Fraction(2, 3), q2)))


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    verdicts = getattr(mod, "VERDICTS", None)
    if verdicts:
        terminalreporter.section("acceptance criteria")
        for n in sorted(verdicts):
            terminalreporter.write_line(verdicts[n])

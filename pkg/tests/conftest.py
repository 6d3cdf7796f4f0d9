import random

import pytest
from gmpy2 import mpq

from superbethe.lattice import ModelSpec, MonodromyFamily, PhiImageFamily


def chain(m=2, n=1, z=("0", "1"), kappa=(1, 1, 1), c=1, backend="exact"):
    return MonodromyFamily(ModelSpec.chain(m, n, [mpq(x) if backend == "exact" else complex(float(mpq(x))) for x in z],
                                           kappa, c, backend=backend))


def rational(rng, span=30, denom=7):
    return mpq(rng.randint(-span, span), rng.randint(1, denom))


@pytest.fixture
def rng():
    return random.Random(20240611)


@pytest.fixture(scope="session")
def fam21():
    return chain()


@pytest.fixture(scope="session")
def fam21_twisted():
    return chain(kappa=(1, 2, 3))


@pytest.fixture(scope="session")
def fam12():
    return chain(1, 2)


@pytest.fixture(scope="session")
def tfam(fam21_twisted):
    return PhiImageFamily(fam21_twisted)


def pytest_terminal_summary(terminalreporter):
    """Repeat the acceptance verdicts, one line per criterion, after the run."""
    import sys
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)

import numpy as np
import pytest
from hypothesis import settings

from chordflow.body import make_canonical_body
from chordflow.sphere import make_circle_grid, make_s2_grid

settings.register_profile("default", max_examples=15, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def disk256():
    return make_canonical_body("ball", [1.0], make_circle_grid(256))


@pytest.fixture(scope="session")
def ellipse256():
    return make_canonical_body("ellipse", [2.0, 1.0], make_circle_grid(256))


@pytest.fixture(scope="session")
def ellipse128():
    return make_canonical_body("ellipse", [2.0, 1.0], make_circle_grid(128))


@pytest.fixture(scope="session")
def ball16():
    return make_canonical_body("ball", [1.0], make_s2_grid(16, 32))


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)

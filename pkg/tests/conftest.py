import numpy as np
import pytest

from macroreveal import fixtures
from macroreveal.raster import Raster


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def noise_raster(seed, size=32, width=None):
    r = np.random.default_rng(seed)
    return Raster(r.random((size, width or size)))


@pytest.fixture(scope="session")
def face():
    return fixtures.face_fixture(1024, 1024)


@pytest.fixture(scope="session")
def face_raster(face):
    from macroreveal.terrain import hillshade

    return hillshade(face.heightmap, fixtures.render_light())


@pytest.fixture(scope="session")
def small_face():
    return fixtures.face_fixture(256, 256)


ACCEPTANCE_LINES = []


def record_acceptance(criterion: str, passed: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(f"{'PASS' if passed else 'FAIL'}  {criterion}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

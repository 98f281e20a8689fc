import numpy as np
import pytest

from qcorr.states import (
    DensityMatrix,
    benatti_4x4,
    horodecki_2x4,
    horodecki_3x3,
    horodecki_4x4_key,
    isotropic,
    upb_pyramid,
    upb_tiles,
    werner,
)

FACTORY_STATES = {
    "horodecki2x4(0)": lambda: horodecki_2x4(0.0),
    "horodecki2x4(0.3)": lambda: horodecki_2x4(0.3),
    "horodecki2x4(1)": lambda: horodecki_2x4(1.0),
    "horodecki3x3(0)": lambda: horodecki_3x3(0.0),
    "horodecki3x3(2.5)": lambda: horodecki_3x3(2.5),
    "horodecki3x3(3.5)": lambda: horodecki_3x3(3.5),
    "horodecki3x3(5)": lambda: horodecki_3x3(5.0),
    "key": horodecki_4x4_key,
    "pyramid": upb_pyramid,
    "tiles": upb_tiles,
    "benatti": benatti_4x4,
    "werner(4,0.3)": lambda: werner(4, 0.3),
    "werner(3,-1)": lambda: werner(3, -1.0),
    "isotropic(3,0.7)": lambda: isotropic(3, 0.7),
    "isotropic(2,1)": lambda: isotropic(2, 1.0),
}

# the bound entangled members of the catalogue
BOUND_ENTANGLED = {
    "horodecki2x4(0.5)": lambda: horodecki_2x4(0.5),
    "horodecki3x3(3.5)": lambda: horodecki_3x3(3.5),
    "key": horodecki_4x4_key,
    "pyramid": upb_pyramid,
    "tiles": upb_tiles,
    "benatti": benatti_4x4,
    "benatti(2x8)": lambda: DensityMatrix(benatti_4x4().data, 2, 8),
}


@pytest.fixture(params=sorted(FACTORY_STATES))
def factory_state(request):
    return FACTORY_STATES[request.param]()


def random_state(m, n, rng, rank=None):
    """Mixture of random pure states with Dirichlet weights."""
    d = m * n
    rank = rank or int(rng.integers(1, d + 1))
    vecs = rng.standard_normal((rank, d)) + 1j * rng.standard_normal((rank, d))
    vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
    w = rng.dirichlet(np.ones(rank))
    data = np.einsum("k,ki,kj->ij", w, vecs, vecs.conj())
    return DensityMatrix(data, m, n)


# one line per acceptance criterion, echoed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)

import numpy as np
import pytest

from numrange.examples import builtin_pencil
from numrange.linalg import HermitianMatrix, MatrixPencil
from numrange.ranges import (
    degenerate_patches,
    direction_grid,
    merge_boundary_clouds,
    trace_boundary_cloud,
)


def random_hermitian(d, rng, real=False):
    m = rng.standard_normal((d, d))
    if not real:
        m = m + 1j * rng.standard_normal((d, d))
    return HermitianMatrix(0.5 * (m + m.conj().T))


def random_pencil(d, n, rng, real=False):
    return MatrixPencil([random_hermitian(d, rng, real) for _ in range(n)])


@pytest.fixture(scope="session")
def cn_pencil():
    return builtin_pencil("chien-nakazato")


@pytest.fixture(scope="session")
def drop_pencil():
    return builtin_pencil("drop")


@pytest.fixture(scope="session")
def cn_patched_cloud(cn_pencil):
    """Dense trace of the chien-nakazato range plus the swept patches
    over its conical crossings; shared because it costs seconds."""
    grid = direction_grid(3, 20000, np.random.default_rng(0))
    cloud = trace_boundary_cloud(cn_pencil, grid)
    patches = degenerate_patches(cn_pencil, cloud)
    return merge_boundary_clouds(cloud, patches)

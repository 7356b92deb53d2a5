import numpy as np
import pytest

from plcurv.conformal import DiscreteMetric
from plcurv.families import TET_FACES
from plcurv.surface import build_surface
from plcurv.surface_file import SurfaceFile, import_obj

from helpers import OCTAHEDRON_FACES, fixtures_dir, load


@pytest.fixture
def tetrahedron() -> SurfaceFile:
    surface = build_surface(TET_FACES)
    return SurfaceFile(surface, DiscreteMetric(np.ones(surface.n_edges)))


@pytest.fixture
def octahedron() -> SurfaceFile:
    surface = build_surface(OCTAHEDRON_FACES)
    return SurfaceFile(surface, DiscreteMetric(np.ones(surface.n_edges)))


@pytest.fixture
def one_vertex_torus() -> SurfaceFile:
    # square with one diagonal, opposite sides identified
    surface = build_surface([(0, 0, 0), (0, 0, 0)], [(0, 1, 2), (2, 0, 1)], n_vertices=1)
    return SurfaceFile(surface, DiscreteMetric([1.0, 1.1, 1.3]))


@pytest.fixture
def two_face_sphere() -> SurfaceFile:
    surface = build_surface([(0, 1, 2), (0, 2, 1)])
    return SurfaceFile(surface, DiscreteMetric([1.0, 1.2, 0.9]))


@pytest.fixture
def perturbed_tetrahedron() -> SurfaceFile:
    return load("perturbed_tetrahedron.plfsurf")


@pytest.fixture
def rhombus() -> SurfaceFile:
    return load("rhombus.plfsurf")


@pytest.fixture
def torus() -> SurfaceFile:
    return load("torus.plfsurf")


@pytest.fixture
def genus2() -> SurfaceFile:
    return load("genus2.plfsurf")


@pytest.fixture
def cube() -> SurfaceFile:
    return import_obj(fixtures_dir / "cube.obj")


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)

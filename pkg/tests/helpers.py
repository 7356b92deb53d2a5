import pathlib

import numpy as np

from plcurv.conformal import DiscreteMetric, edge_vertices
from plcurv.families import TET_FACES
from plcurv.surface import build_surface
from plcurv.surface_file import SurfaceFile, read_surface_file

this_dir = pathlib.Path(__file__).resolve().parent
fixtures_dir = this_dir.parent / "fixtures"

OCTAHEDRON_FACES = [
    (0, 1, 2), (0, 2, 3), (0, 3, 4), (0, 4, 1),
    (5, 2, 1), (5, 3, 2), (5, 4, 3), (5, 1, 4),
]

# 3 L(pi/3), the volume of the regular ideal hyperbolic tetrahedron
IDEAL_TETRAHEDRON_VOLUME = 1.0149416064096536


def load(name: str) -> SurfaceFile:
    return read_surface_file(fixtures_dir / name)


def edge_between(surface, i: int, j: int) -> int:
    """Id of the single edge joining i and j."""
    ends = edge_vertices(surface)
    hits = [e for e, (a, b) in enumerate(ends.tolist()) if {a, b} == {i, j}]
    assert len(hits) == 1, hits
    return hits[0]


def random_tetrahedron(rng, spread: float = 0.1) -> SurfaceFile:
    surface = build_surface(TET_FACES)
    lengths = 1.0 + spread * rng.uniform(-1.0, 1.0, surface.n_edges)
    return SurfaceFile(surface, DiscreteMetric(lengths))


def central_gradient(fn, u, h=1.0e-6):
    u = np.asarray(u, dtype=float)
    grad = np.empty_like(u)
    for i in range(u.shape[0]):
        step = np.zeros_like(u)
        step[i] = h
        grad[i] = (fn(u + step) - fn(u - step)) / (2 * h)
    return grad

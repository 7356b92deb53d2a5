"""Discrete Gaussian curvature of piecewise flat surfaces and constant-curvature uniformization"""

from .conformal import (
    CurvatureReport,
    DiscreteMetric,
    FlipRule,
    angle_defects,
    curvature_report,
    in_penner_cell,
    is_delaunay_edge,
    make_delaunay,
    scale_metric,
    voronoi_areas,
)
from .energy import EnergyEval, energy_E, energy_F, total_area
from .families import FamilyConfig, FamilyKind, eval_g, eval_h, genus2_family, tetrahedron_family
from .geometry import (
    DegenerateTriangleError,
    circumradius,
    corner_area,
    f_energy,
    lobachevsky,
    triangle_angles,
    triangle_area,
)
from .solver import SolverOptions, SolveResult, find_roots, scan_objective, uniformize
from .surface import MarkedSurface, build_surface, euler_characteristic, flip_edge
from .surface_file import SurfaceFile, import_obj, parse_surface_file, serialize_surface_file

__version__ = '0.1.0'

__all__ = [
    'CurvatureReport', 'DiscreteMetric', 'FlipRule', 'angle_defects', 'curvature_report',
    'in_penner_cell', 'is_delaunay_edge', 'make_delaunay', 'scale_metric', 'voronoi_areas',
    'EnergyEval', 'energy_E', 'energy_F', 'total_area',
    'FamilyConfig', 'FamilyKind', 'eval_g', 'eval_h', 'genus2_family', 'tetrahedron_family',
    'DegenerateTriangleError', 'circumradius', 'corner_area', 'f_energy', 'lobachevsky',
    'triangle_angles', 'triangle_area',
    'SolverOptions', 'SolveResult', 'find_roots', 'scan_objective', 'uniformize',
    'MarkedSurface', 'build_surface', 'euler_characteristic', 'flip_edge',
    'SurfaceFile', 'import_obj', 'parse_surface_file', 'serialize_surface_file',
]

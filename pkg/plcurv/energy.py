"""Variational functions of the conformal factor: E, A_tot and F = E - pi chi log A_tot.

Each is evaluated on the Delaunay triangulation of the PL-metric d(u) (see
``conformal_metric``) and returned with its gradient and sparse Hessian.
Hessians are assembled per face on corners and scattered to vertex pairs, so
loops and multi-edges accumulate like any other edge. The Hessian H is the
matrix of the quadratic form du^T H du = d^2 f(du, du).
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix

from .conformal import (
    DiscreteMetric,
    angle_defects,
    as_conformal_factor,
    conformal_metric,
    voronoi_areas,
)
from .geometry import areas_batch, circumradii_batch, cotangents_batch, face_energy_batch
from .surface import MarkedSurface

__all__ = [
    'AREA_FLOOR', 'AreaUnderflowError', 'EnergyEval', 'ConformalState',
    'conformal_state', 'triangulation_state', 'energy_E', 'total_area',
    'energy_F', 'lagrange_residual', 'normalize_area', 'gauss_bonnet_curvature',
    'constrained_energy', 'uniqueness_guaranteed', 'objective_eval',
]

AREA_FLOOR = 1e-300


class AreaUnderflowError(FloatingPointError):
    """Total area too small for log A_tot to be meaningful."""


@dataclass
class EnergyEval:
    value: float
    gradient: np.ndarray
    hessian: Optional[csr_matrix] = None


@dataclass
class ConformalState:
    """Everything the energies need at one conformal factor u."""

    u: np.ndarray
    surface: MarkedSurface
    metric: DiscreteMetric
    flips: int
    W: np.ndarray
    A: np.ndarray
    total_area: float
    face_energy: float

    @property
    def chi(self) -> int:
        return self.surface.chi


def triangulation_state(tri: MarkedSurface, metric: DiscreteMetric, u, flips: int = 0) -> ConformalState:
    """State on a fixed Delaunay triangulation, without flipping."""
    u = as_conformal_factor(u, tri.n_vertices)
    face_lengths = metric.face_lengths(tri)
    W = angle_defects(tri, metric)
    A = voronoi_areas(tri, metric)
    return ConformalState(
        u=u,
        surface=tri,
        metric=metric,
        flips=flips,
        W=W,
        A=A,
        total_area=float(np.sum(areas_batch(face_lengths))),
        face_energy=float(np.sum(face_energy_batch(face_lengths))),
    )


def conformal_state(s: MarkedSurface, base_m: DiscreteMetric, u) -> ConformalState:
    tri, metric, flips = conformal_metric(s, base_m, u)
    return triangulation_state(tri, metric, u, flips)


def _side_vertices(tri: MarkedSurface):
    fv = tri.face_vertices
    return fv, fv[:, [1, 2, 0]]


def _assemble(n: int, rows, cols, vals) -> csr_matrix:
    rows = np.concatenate([np.ravel(r) for r in rows])
    cols = np.concatenate([np.ravel(c) for c in cols])
    vals = np.concatenate([np.ravel(v) for v in vals])
    return coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()


def energy_hessian(state: ConformalState) -> csr_matrix:
    """Cotangent Laplacian: du^T H du = 1/2 sum_ij (cot alpha_k + cot alpha_l)(du_i - du_j)^2."""
    tri = state.surface
    w = 0.5 * cotangents_batch(state.metric.face_lengths(tri))
    vi, vj = _side_vertices(tri)
    return _assemble(tri.n_vertices, [vi, vj, vi, vj], [vi, vj, vj, vi], [w, w, -w, -w])


def area_hessian(state: ConformalState) -> csr_matrix:
    """du^T H du = sum 2 A_ij (du_i + du_j)^2 - 1/2 sum R^2 cot(alpha) (du_i - du_j)^2.

    A_ij = l_ij^2 (cot alpha_k + cot alpha_l) / 8 and R is the circumradius of
    the face holding alpha.
    """
    tri = state.surface
    face_lengths = state.metric.face_lengths(tri)
    cot = cotangents_batch(face_lengths)
    radius_sq = circumradii_batch(face_lengths)[:, None] ** 2
    plus = face_lengths ** 2 * cot / 4.0
    minus = 0.5 * radius_sq * cot
    vi, vj = _side_vertices(tri)
    diag = plus - minus
    off = plus + minus
    return _assemble(tri.n_vertices, [vi, vj, vi, vj], [vi, vj, vj, vi], [diag, diag, off, off])


def _energy_eval(state: ConformalState, hessian: bool) -> EnergyEval:
    value = state.face_energy + 2.0 * np.pi * float(np.sum(state.u))
    return EnergyEval(value, state.W.copy(), energy_hessian(state) if hessian else None)


def _area_eval(state: ConformalState, hessian: bool) -> EnergyEval:
    return EnergyEval(state.total_area, 2.0 * state.A, area_hessian(state) if hessian else None)


def _objective_eval(state: ConformalState, hessian: bool) -> EnergyEval:
    area = state.total_area
    if not area > AREA_FLOOR:
        raise AreaUnderflowError(f'Total area {area:.3g} underflows; log A_tot undefined')
    chi = state.chi
    e = _energy_eval(state, hessian)
    a = _area_eval(state, hessian)
    value = e.value - np.pi * chi * np.log(area)
    gradient = e.gradient - np.pi * chi * a.gradient / area
    hess = None
    if hessian:
        dense = (e.hessian.toarray()
                 - np.pi * chi * (a.hessian.toarray() / area - np.outer(a.gradient, a.gradient) / area ** 2))
        hess = csr_matrix(0.5 * (dense + dense.T))
    return EnergyEval(float(value), gradient, hess)


def energy_E(s: MarkedSurface, base_m: DiscreteMetric, u, hessian: bool = True) -> EnergyEval:
    """E(u) = sum_faces (2 f(log l) - pi sum log l) + 2 pi sum u_i on the Delaunay triangulation of d(u).

    Gradient: the angle defects W(u).
    """
    return _energy_eval(conformal_state(s, base_m, u), hessian)


def total_area(s: MarkedSurface, base_m: DiscreteMetric, u, hessian: bool = True) -> EnergyEval:
    """A_tot(u) with gradient 2 A_i(u)."""
    return _area_eval(conformal_state(s, base_m, u), hessian)


def energy_F(s: MarkedSurface, base_m: DiscreteMetric, u, hessian: bool = True) -> EnergyEval:
    """F = E - pi chi log A_tot; invariant under u -> u + c.

    Its critical points are the metrics of constant discrete Gaussian
    curvature: grad_i F = W_i - 2 pi chi A_i / A_tot.
    """
    return _objective_eval(conformal_state(s, base_m, u), hessian)


def objective_eval(state: ConformalState, hessian: bool = True) -> EnergyEval:
    """F, or E when chi = 0, from a precomputed state."""
    if state.chi == 0:
        return _energy_eval(state, hessian)
    return _objective_eval(state, hessian)


def lagrange_residual(s: MarkedSurface, base_m: DiscreteMetric, u) -> np.ndarray:
    """W_i - 2 pi chi A_i / A_tot; vanishes exactly at constant curvature."""
    state = conformal_state(s, base_m, u)
    return state.W - 2.0 * np.pi * state.chi * state.A / state.total_area


def normalize_area(s: MarkedSurface, base_m: DiscreteMetric, u) -> np.ndarray:
    """Shift u along (1, ..., 1) onto the slice A_tot = 1."""
    u = as_conformal_factor(u, s.n_vertices)
    return u - 0.5 * np.log(conformal_state(s, base_m, u).total_area)


def constrained_energy(s: MarkedSurface, base_m: DiscreteMetric, u) -> float:
    """E restricted to the unit-area slice, evaluated at the slice point of u's shift class."""
    return energy_E(s, base_m, normalize_area(s, base_m, u), hessian=False).value


def gauss_bonnet_curvature(chi: int, area: float) -> float:
    """The only possible constant value of K: 2 pi chi / A_tot."""
    return 2.0 * np.pi * chi / area


def uniqueness_guaranteed(s: MarkedSurface) -> bool:
    """Whether constant-curvature metrics in a conformal class are unique up to scale.

    True for spheres with three marked points, tori, and higher-genus
    surfaces with one marked point; elsewhere several may exist.
    """
    genus = s.genus
    return (genus == 0 and s.n_vertices == 3) or genus == 1 or (genus >= 2 and s.n_vertices == 1)

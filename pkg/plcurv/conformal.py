"""Discrete metrics, conformal scaling and intrinsic Delaunay triangulations.

Everything here maps a marked surface plus edge lengths (and possibly a
conformal factor) to the Delaunay triangulation of the resulting PL-metric
and the curvature quantities defined on it.
"""

from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from .geometry import (
    DegenerateTriangleError,
    angles_batch,
    areas_batch,
    check_faces,
    cosines_batch,
    cotangents_batch,
    valid_faces,
)
from .logging import get_logger, log_with_context
from .surface import MarkedSurface

logger = get_logger(__name__)

__all__ = [
    'EPS_DELAUNAY', 'FlipRule', 'NotDelaunayError', 'FlipLimitError',
    'DiscreteMetric', 'CurvatureReport', 'as_conformal_factor', 'scale_metric',
    'is_delaunay_edge', 'delaunay_scores', 'make_delaunay', 'angle_defects',
    'corner_areas', 'voronoi_areas', 'curvature_report', 'in_penner_cell',
    'conformal_metric',
]

EPS_DELAUNAY = 1e-12


class FlipRule(str, Enum):
    """Length of the new diagonal after a flip.

    EUCLIDEAN keeps the PL-metric (the diagonal of the unfolded quad);
    PTOLEMY keeps the Penner coordinates of the decorated hyperbolic surface.
    Both give the same length when the edge is Delaunay-degenerate.
    """
    EUCLIDEAN = 'euclidean'
    PTOLEMY = 'ptolemy'


class NotDelaunayError(ValueError):
    """Voronoi areas requested on a triangulation that is not Delaunay."""


class FlipLimitError(RuntimeError):
    """Flip algorithm exceeded its termination guard."""


@dataclass(frozen=True)
class DiscreteMetric:
    """Positive length per edge id; lambda = 2 log(length)."""

    lengths: np.ndarray

    def __post_init__(self):
        lengths = np.array(self.lengths, dtype=float)
        if lengths.ndim != 1:
            raise ValueError('Edge lengths must be a flat array indexed by edge id')
        if not np.all(np.isfinite(lengths)) or np.any(lengths <= 0):
            bad = int(np.flatnonzero(~(np.isfinite(lengths) & (lengths > 0)))[0])
            raise ValueError(f'Edge {bad} has non-positive or non-finite length {lengths[bad]}')
        lengths.setflags(write=False)
        object.__setattr__(self, 'lengths', lengths)

    @classmethod
    def from_log_lengths(cls, log_lengths: np.ndarray) -> 'DiscreteMetric':
        return cls(np.exp(0.5 * np.asarray(log_lengths, dtype=float)))

    @property
    def log_lengths(self) -> np.ndarray:
        return 2.0 * np.log(self.lengths)

    def face_lengths(self, s: MarkedSurface) -> np.ndarray:
        """(F, 3) side lengths in the face-side layout of s."""
        if self.lengths.shape[0] != s.n_edges:
            raise ValueError(f'Metric has {self.lengths.shape[0]} lengths for {s.n_edges} edges')
        return self.lengths[s.face_edges]

    def is_valid(self, s: MarkedSurface) -> bool:
        return bool(np.all(valid_faces(self.face_lengths(s))))

    def validate(self, s: MarkedSurface):
        check_faces(self.face_lengths(s))


@dataclass
class CurvatureReport:
    """Per-vertex angle defect W, Voronoi area A and curvature K = W / A."""

    W: np.ndarray
    A: np.ndarray
    K: np.ndarray
    total_area: float
    chi: int
    flips: int = 0

    @property
    def sum_W(self) -> float:
        return float(np.sum(self.W))


def as_conformal_factor(u, n_vertices: int) -> np.ndarray:
    """Per-vertex log scale factors as a float vector; None means zero."""
    if u is None:
        return np.zeros(n_vertices)
    u = np.array(u, dtype=float).reshape(-1)
    if u.shape[0] != n_vertices:
        raise ValueError(f'Conformal factor has {u.shape[0]} entries for {n_vertices} vertices')
    if not np.all(np.isfinite(u)):
        raise ValueError('Conformal factor has non-finite entries')
    return u


def edge_vertices(s: MarkedSurface) -> np.ndarray:
    """(E, 2) endpoints of every edge."""
    h = s.edge_halfedges[:, 0]
    fv = s.face_vertices
    return np.stack([fv[h // 3, h % 3], fv[h // 3, (h % 3 + 1) % 3]], axis=1)


def scale_metric(s: MarkedSurface, m: DiscreteMetric, u) -> Tuple[DiscreteMetric, bool]:
    """l_ij -> l_ij exp((u_i + u_j) / 2) on the triangulation of s.

    Returns the scaled metric and whether every face is still a triangle.
    """
    u = as_conformal_factor(u, s.n_vertices)
    ends = edge_vertices(s)
    scaled = DiscreteMetric(m.lengths * np.exp(0.5 * (u[ends[:, 0]] + u[ends[:, 1]])))
    return scaled, scaled.is_valid(s)


def delaunay_scores(s: MarkedSurface, lengths: np.ndarray) -> np.ndarray:
    """(E,) value that is >= -EPS_DELAUNAY exactly on Delaunay edges.

    The cotangent sum cot(alpha_k) + cot(alpha_l) when both faces of the edge
    are triangles, otherwise cos(alpha_k) + cos(alpha_l) from the law of
    cosines.
    """
    face_lengths = np.asarray(lengths)[s.face_edges]
    ok = valid_faces(face_lengths)
    h0, h1 = s.edge_halfedges[:, 0], s.edge_halfedges[:, 1]
    both = ok[h0 // 3] & ok[h1 // 3]
    scores = np.empty(s.n_edges)
    if np.any(both):
        cot = np.zeros_like(face_lengths)
        cot[ok] = cotangents_batch(face_lengths[ok])
        scores[both] = cot.flat[h0[both]] + cot.flat[h1[both]]
    if not np.all(both):
        cos = cosines_batch(face_lengths)
        scores[~both] = cos.flat[h0[~both]] + cos.flat[h1[~both]]
    return scores


def is_delaunay_edge(s: MarkedSurface, m: DiscreteMetric, e: int) -> bool:
    """cot(alpha_k) + cot(alpha_l) >= -EPS_DELAUNAY for the two angles facing e."""
    face_lengths = m.face_lengths(s)
    for h in s.edge_halfedges[e]:
        f = int(h) // 3
        if not valid_faces(face_lengths[f:f + 1])[0]:
            raise DegenerateTriangleError(
                f'Face {f} next to edge {e} violates the triangle inequality', face=f
            )
    h0, h1 = (int(h) for h in s.edge_halfedges[e])
    cot = cotangents_batch(face_lengths[[h0 // 3, h1 // 3]])
    return bool(cot[0, h0 % 3] + cot[1, h1 % 3] >= -EPS_DELAUNAY)


def _flipped_length(s: MarkedSurface, lengths: np.ndarray, e: int, rule: FlipRule) -> float:
    i, j, k, l, e_jk, e_ki, e_il, e_lj = s.flip_quad(e)
    l_ij, l_jk, l_ki, l_il, l_lj = lengths[[e, e_jk, e_ki, e_il, e_lj]]
    if rule is FlipRule.PTOLEMY:
        return float((l_ki * l_lj + l_il * l_jk) / l_ij)

    # Unfold both triangles at i and measure the diagonal across the quad.
    angles = angles_batch(np.array([[l_ij, l_jk, l_ki], [l_ij, l_il, l_lj]]))
    theta_i = angles[0, 1] + angles[1, 2]
    sq = l_ki ** 2 + l_il ** 2 - 2.0 * l_ki * l_il * np.cos(theta_i)
    return float(np.sqrt(max(sq, 0.0)))


def make_delaunay(
    s: MarkedSurface,
    m: DiscreteMetric,
    rule: FlipRule = FlipRule.EUCLIDEAN,
    max_flips: Optional[int] = None,
) -> Tuple[MarkedSurface, DiscreteMetric, int]:
    """
    Flip non-Delaunay edges until every edge is Delaunay.

    Edges are processed from a queue; after each flip the four sides of the
    quadrilateral are queued again. Only violations beyond EPS_DELAUNAY are
    flipped.

    Args:
        s: triangulated surface
        m: edge lengths on s
        rule: length update for flipped edges
        max_flips: termination guard, defaults to 50 |E|

    Returns:
        (Delaunay surface, its lengths, number of flips)

    Raises:
        DegenerateTriangleError: a face of the input (Euclidean rule) or of
            the result is not a triangle
        FlipLimitError: the guard was exceeded
    """
    if rule is FlipRule.EUCLIDEAN:
        m.validate(s)
    limit = 50 * s.n_edges if max_flips is None else int(max_flips)

    work = s.copy(writable=True)
    lengths = np.array(m.lengths, dtype=float)
    scores = delaunay_scores(work, lengths)
    queue = deque(int(e) for e in np.flatnonzero(scores < -EPS_DELAUNAY))
    queued = np.zeros(s.n_edges, dtype=bool)
    queued[list(queue)] = True
    flips = 0

    while queue:
        e = queue.popleft()
        queued[e] = False
        if _edge_score(work, lengths, e) >= -EPS_DELAUNAY:
            continue
        if flips >= limit:
            raise FlipLimitError(f'Flip guard of {limit} flips exceeded on {s!r}')
        new_length = _flipped_length(work, lengths, e, rule)
        _, _, _, _, e_jk, e_ki, e_il, e_lj = work.flip_quad(e)
        work._flip_inplace(e)
        lengths[e] = new_length
        flips += 1
        for x in (e_jk, e_ki, e_il, e_lj):
            if not queued[x]:
                queued[x] = True
                queue.append(x)

    check_faces(lengths[work.face_edges])
    if flips:
        log_with_context(logger, 'debug', 'delaunay flips', flips=flips, rule=rule.value)
    return work.copy(), DiscreteMetric(lengths), flips


def _edge_score(s: MarkedSurface, lengths: np.ndarray, e: int) -> float:
    h0, h1 = (int(h) for h in s.edge_halfedges[e])
    rows = lengths[s.face_edges[[h0 // 3, h1 // 3]]]
    if np.all(valid_faces(rows)):
        vals = cotangents_batch(rows)
    else:
        vals = cosines_batch(rows)
    return float(vals[0, h0 % 3] + vals[1, h1 % 3])


def corner_angles(face_lengths: np.ndarray) -> np.ndarray:
    """(F, 3) angle at each corner; corner c faces side c + 1."""
    return angles_batch(face_lengths)[:, [1, 2, 0]]


def corner_areas(face_lengths: np.ndarray) -> np.ndarray:
    """(F, 3) signed circumcentric area at each corner.

    Corner c collects half of the edge regions l^2 cot / 4 of its two sides,
    side c and side c + 2.
    """
    regions = face_lengths ** 2 * cotangents_batch(face_lengths) / 8.0
    return regions + regions[:, [2, 0, 1]]


def angle_defects(s: MarkedSurface, m: DiscreteMetric) -> np.ndarray:
    """W_i = 2 pi - cone angle at i; a loop contributes both of its corners."""
    face_lengths = m.face_lengths(s)
    check_faces(face_lengths)
    cone = np.bincount(
        s.face_vertices.ravel(), weights=corner_angles(face_lengths).ravel(),
        minlength=s.n_vertices,
    )
    return 2.0 * np.pi - cone


def voronoi_areas(s: MarkedSurface, m: DiscreteMetric) -> np.ndarray:
    """Voronoi cell areas from the circumcentric corner formula.

    Raises:
        NotDelaunayError: some edge of (s, m) is not Delaunay
    """
    face_lengths = m.face_lengths(s)
    check_faces(face_lengths)
    scores = delaunay_scores(s, m.lengths)
    bad = np.flatnonzero(scores < -EPS_DELAUNAY)
    if bad.size:
        raise NotDelaunayError(
            f'Edge {int(bad[0])} is not Delaunay (cot sum {scores[bad[0]]:.3g}); run make_delaunay first'
        )
    return np.bincount(
        s.face_vertices.ravel(), weights=corner_areas(face_lengths).ravel(),
        minlength=s.n_vertices,
    )


def curvature_report(s: MarkedSurface, m: DiscreteMetric) -> CurvatureReport:
    """Discrete Gaussian curvature K_i = W_i / A_i of the PL-metric (s, m)."""
    tri, metric, flips = make_delaunay(s, m)
    W = angle_defects(tri, metric)
    A = voronoi_areas(tri, metric)
    total = float(np.sum(areas_batch(metric.face_lengths(tri))))
    return CurvatureReport(W=W, A=A, K=W / A, total_area=total, chi=s.chi, flips=flips)


def in_penner_cell(s: MarkedSurface, base_m: DiscreteMetric, u) -> bool:
    """Whether the triangulation of s stays Delaunay for the metric scaled by u."""
    scaled, ok = scale_metric(s, base_m, u)
    if not ok:
        return False
    return bool(np.all(delaunay_scores(s, scaled.lengths) >= -EPS_DELAUNAY))


def conformal_metric(
    s: MarkedSurface, base_m: DiscreteMetric, u
) -> Tuple[MarkedSurface, DiscreteMetric, int]:
    """Delaunay triangulation and lengths of the PL-metric d(u) in the conformal class of (s, base_m).

    The base metric is first brought to its Delaunay triangulation with
    Euclidean flips; its Penner coordinates are shifted by u_i + u_j and
    Ptolemy flips then restore the Delaunay property.

    Returns:
        (triangulation, lengths, number of Ptolemy flips)
    """
    u = as_conformal_factor(u, s.n_vertices)
    base_tri, base_delaunay, _ = make_delaunay(s, base_m)
    scaled, _ = scale_metric(base_tri, base_delaunay, u)
    limit = int(50 * s.n_edges * (1.0 + np.max(np.abs(u))))
    return make_delaunay(base_tri, scaled, rule=FlipRule.PTOLEMY, max_flips=limit)

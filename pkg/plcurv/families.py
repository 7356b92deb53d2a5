"""Two one-parameter families of PL-metrics whose constant-curvature members are counted.

Tetrahedron: edges a = 01, a_bar = 23, b = 02, b_bar = 13, c = 12, c_bar = 03
with lengths (1, 1, b0, b0, c0, c0), scaled by u(v) = (0, 0, v, v).

Genus 2: two vertices, eight triangles; a-edges are loops (two at each
vertex), b- and c-edges join the vertices. Lengths a = 1, b = b0, c = c0,
scaled by u(v) = (0, v).

For both, the curvature mismatch D(v) vanishes exactly at the members with
constant discrete Gaussian curvature. The tetrahedron family has three such
members for (b0, c0) = (2.2, 2.35). Every genus-2 member stays in one Penner
cell and D = -16 h there; for b0 between 2.6 and 3.2 (c0 = b0 + 0.15) it
decreases strictly and v = 0 is its only zero.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator

from .conformal import DiscreteMetric, curvature_report, scale_metric
from .geometry import angles_batch, areas_batch
from .surface import MarkedSurface, build_surface

__all__ = [
    'FamilyKind', 'FamilyConfig', 'FamilyMember', 'TET_FACES', 'TET_EDGE_IDS',
    'TET_LABELS', 'GENUS2_FACES', 'GENUS2_EDGE_IDS', 'GENUS2_LABELS',
    'tetrahedron_family', 'genus2_family', 'family_member', 'eval_g', 'eval_h',
    'family_mismatch', 'closed_form_g', 'closed_form_h',
]

TET_FACES = ((0, 1, 2), (0, 2, 3), (0, 3, 1), (1, 3, 2))
TET_EDGE_IDS = ((0, 4, 2), (2, 1, 5), (5, 3, 0), (3, 1, 4))
TET_LABELS = ('a', 'a_bar', 'b', 'b_bar', 'c', 'c_bar')

# Fixed gluing of eight (a, b, c) triangles; tests/test_families.py checks
# that it is closed, oriented, has chi = -2 and constant curvature at v = 0.
GENUS2_FACES = (
    (0, 0, 1), (0, 1, 1), (0, 0, 1), (0, 1, 1),
    (0, 0, 1), (0, 1, 1), (0, 0, 1), (0, 1, 1),
)
GENUS2_EDGE_IDS = (
    (0, 8, 4), (5, 3, 8), (1, 9, 5), (6, 2, 9),
    (0, 10, 6), (7, 3, 10), (1, 11, 7), (4, 2, 11),
)
GENUS2_LABELS = tuple(f'{kind}{n}' for kind in 'abc' for n in range(1, 5))


class FamilyKind(str, Enum):
    TET = 'tet'
    GENUS2 = 'genus2'

    def u_of_v(self, v: float) -> np.ndarray:
        """Conformal factor of member v: (0, 0, v, v) on the tetrahedron, (0, v) in genus 2."""
        if self is FamilyKind.TET:
            return np.array([0.0, 0.0, v, v])
        return np.array([0.0, v])


class FamilyConfig(BaseModel):
    """Family parameters (b0, c0) and the member parameter v"""

    b0: float = Field(..., ge=1.0, description="Length of the b-edges at v = 0")
    c0: float = Field(..., ge=1.0, description="Length of the c-edges at v = 0")
    v: float = Field(default=0.0, description="Conformal parameter, inside [-log(b0^2+c0^2), log(b0^2+c0^2)]")

    @model_validator(mode='after')
    def _check_ranges(self) -> 'FamilyConfig':
        if self.c0 ** 2 > 1.0 + self.b0 ** 2:
            raise ValueError(f'c0^2 = {self.c0 ** 2:g} exceeds 1 + b0^2 = {1.0 + self.b0 ** 2:g}')
        bound = self.half_width
        if not -bound <= self.v <= bound:
            raise ValueError(f'v = {self.v:g} outside [-{bound:g}, {bound:g}]')
        return self

    @property
    def half_width(self) -> float:
        return float(np.log(self.b0 ** 2 + self.c0 ** 2))

    @property
    def interval(self) -> Tuple[float, float]:
        return -self.half_width, self.half_width

    def with_v(self, v: float) -> 'FamilyConfig':
        return FamilyConfig(b0=self.b0, c0=self.c0, v=v)


@dataclass
class FamilyMember:
    surface: MarkedSurface
    metric: DiscreteMetric
    labels: Tuple[str, ...]
    base_metric: DiscreteMetric
    u: np.ndarray
    config: FamilyConfig


def _member(faces, edge_ids, labels, base_lengths, u, cfg) -> FamilyMember:
    surface = build_surface(faces, edge_ids)
    base = DiscreteMetric(np.asarray(base_lengths, dtype=float))
    metric, _ = scale_metric(surface, base, u)
    return FamilyMember(surface, metric, labels, base, np.asarray(u, dtype=float), cfg)


def tetrahedron_family(cfg: FamilyConfig) -> FamilyMember:
    """Member v: a = 1, a_bar = e^v, b = b_bar = b0 e^(v/2), c = c_bar = c0 e^(v/2)."""
    return _member(
        TET_FACES, TET_EDGE_IDS, TET_LABELS,
        [1.0, 1.0, cfg.b0, cfg.b0, cfg.c0, cfg.c0],
        FamilyKind.TET.u_of_v(cfg.v), cfg,
    )


def genus2_family(cfg: FamilyConfig) -> FamilyMember:
    """Member v: loops at vertex 0 of length 1, loops at vertex 1 of length e^v, b0 e^(v/2) and c0 e^(v/2) between."""
    return _member(
        GENUS2_FACES, GENUS2_EDGE_IDS, GENUS2_LABELS,
        [1.0] * 4 + [cfg.b0] * 4 + [cfg.c0] * 4,
        FamilyKind.GENUS2.u_of_v(cfg.v), cfg,
    )


def family_member(kind: FamilyKind, cfg: FamilyConfig) -> FamilyMember:
    if FamilyKind(kind) is FamilyKind.TET:
        return tetrahedron_family(cfg)
    return genus2_family(cfg)


def eval_g(cfg: FamilyConfig) -> float:
    """Tetrahedron mismatch D(v) = W_1 A_3 - W_3 A_1 (vertices 0 and 2 here)."""
    member = tetrahedron_family(cfg)
    report = curvature_report(member.surface, member.metric)
    return float(report.W[0] * report.A[2] - report.W[2] * report.A[0])


def eval_h(cfg: FamilyConfig) -> float:
    """Genus-2 mismatch D(v) = W_1 A_2 - W_2 A_1."""
    member = genus2_family(cfg)
    report = curvature_report(member.surface, member.metric)
    return float(report.W[0] * report.A[1] - report.W[1] * report.A[0])


def family_mismatch(kind: FamilyKind, cfg: FamilyConfig) -> float:
    if FamilyKind(kind) is FamilyKind.TET:
        return eval_g(cfg)
    return eval_h(cfg)


def _triangle_pieces(cfg: FamilyConfig):
    """(F_a_bar - F_a, alpha - alpha_bar, A + A_bar) for the two triangle types at v."""
    s = np.exp(cfg.v / 2.0)
    rows = np.array([
        [1.0, cfg.b0 * s, cfg.c0 * s],
        [np.exp(cfg.v), cfg.b0 * s, cfg.c0 * s],
    ])
    alpha = angles_batch(rows)[:, 0]
    areas = areas_batch(rows)
    pieces = rows[:, 0] ** 2 / np.tan(alpha) / 8.0
    return pieces[1] - pieces[0], alpha[0] - alpha[1], areas[0] + areas[1]


def closed_form_g(cfg: FamilyConfig) -> float:
    """2 pi (F_a_bar - F_a) + (alpha - alpha_bar)(A + A_bar) with F_x = x^2 cot(opposite angle) / 8."""
    d_piece, d_angle, area = _triangle_pieces(cfg)
    return float(2.0 * np.pi * d_piece + d_angle * area)


def closed_form_h(cfg: FamilyConfig) -> float:
    """pi (F_a_bar - F_a) + (alpha_bar - alpha)(A + A_bar); equals -D(v) / 16 for the genus-2 family."""
    d_piece, d_angle, area = _triangle_pieces(cfg)
    return float(np.pi * d_piece - d_angle * area)

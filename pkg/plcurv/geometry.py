"""Euclidean triangle geometry and the Lobachevsky function.

Scalar operations take a single triangle; the ``*_batch`` helpers take an
``(F, 3)`` array of side lengths where column ``k`` is side ``k`` of a face and
return side-indexed quantities (the angle, cotangent, ... opposite that side).
"""

from typing import NamedTuple, Optional

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.special import zeta

__all__ = [
    'DegenerateTriangleError', 'TriangleLengths', 'TriangleAngles',
    'triangle_angles', 'lobachevsky', 'clausen2', 'f_energy', 'circumradius',
    'triangle_area', 'corner_area', 'valid_faces', 'check_faces', 'areas_batch',
    'angles_batch', 'cotangents_batch', 'cosines_batch', 'circumradii_batch',
    'face_energy_batch',
]

_CLAUSEN_TERMS = 30
# Coefficients of Cl2(t) = t - t log|t| + t * sum_n c_n t^(2n), |t| < 2 pi.
_n = np.arange(1, _CLAUSEN_TERMS + 1, dtype=float)
_CLAUSEN_COEFFS = np.concatenate(
    ([0.0], zeta(2 * _n, 1) / (_n * (2 * _n + 1)) / (2 * np.pi) ** (2 * _n))
)


class DegenerateTriangleError(ValueError):
    """Side lengths violate a sharp triangle inequality."""

    def __init__(self, message: str, face: Optional[int] = None):
        super().__init__(message)
        self.face = face


class TriangleLengths(NamedTuple):
    a: float
    b: float
    c: float


class TriangleAngles(NamedTuple):
    """Angles in radians; alpha is opposite side a."""
    alpha: float
    beta: float
    gamma: float


def _as_lengths(t) -> np.ndarray:
    lengths = np.asarray(t, dtype=float).reshape(1, 3)
    if not valid_faces(lengths)[0]:
        raise DegenerateTriangleError(
            f'Lengths {tuple(lengths[0])} violate the triangle inequality'
        )
    return lengths


def valid_faces(lengths: np.ndarray) -> np.ndarray:
    """Boolean mask of rows that satisfy the sharp triangle inequalities."""
    lengths = np.asarray(lengths, dtype=float)
    s = np.sort(lengths, axis=1)
    finite = np.all(np.isfinite(lengths), axis=1)
    with np.errstate(invalid='ignore'):
        return finite & (s[:, 0] > 0) & (s[:, 2] < s[:, 0] + s[:, 1])


def check_faces(lengths: np.ndarray):
    """Raise DegenerateTriangleError naming the first face that is not a triangle."""
    ok = valid_faces(lengths)
    if not np.all(ok):
        face = int(np.flatnonzero(~ok)[0])
        raise DegenerateTriangleError(
            f'Face {face} with lengths {tuple(float(x) for x in lengths[face])} '
            f'violates the triangle inequality',
            face=face,
        )


def areas_batch(lengths: np.ndarray) -> np.ndarray:
    """Heron's formula in Kahan's stable ordering (rows sorted descending)."""
    s = -np.sort(-np.asarray(lengths, dtype=float), axis=1)
    a, b, c = s[:, 0], s[:, 1], s[:, 2]
    prod = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c))
    return 0.25 * np.sqrt(np.maximum(prod, 0.0))


def _opposite_terms(lengths: np.ndarray) -> np.ndarray:
    """b^2 + c^2 - a^2 for every side a of every face."""
    sq = np.asarray(lengths, dtype=float) ** 2
    return sq.sum(axis=1, keepdims=True) - 2.0 * sq


def angles_batch(lengths: np.ndarray) -> np.ndarray:
    """Angle opposite every side, via atan2(4A, b^2 + c^2 - a^2)."""
    area4 = 4.0 * areas_batch(lengths)
    return np.arctan2(area4[:, None], _opposite_terms(lengths))


def cotangents_batch(lengths: np.ndarray) -> np.ndarray:
    area4 = 4.0 * areas_batch(lengths)
    return _opposite_terms(lengths) / area4[:, None]


def cosines_batch(lengths: np.ndarray) -> np.ndarray:
    """Law-of-cosines value (b^2 + c^2 - a^2) / (2bc), defined for any positive lengths.

    Unlike the angle it stays meaningful when a row is not a Euclidean
    triangle, which the Ptolemy Delaunay test relies on.
    """
    lengths = np.asarray(lengths, dtype=float)
    other = np.prod(lengths, axis=1, keepdims=True) / lengths
    return _opposite_terms(lengths) / (2.0 * other)


def circumradii_batch(lengths: np.ndarray) -> np.ndarray:
    lengths = np.asarray(lengths, dtype=float)
    return np.prod(lengths, axis=1) / (4.0 * areas_batch(lengths))


def triangle_angles(t) -> TriangleAngles:
    return TriangleAngles(*(float(x) for x in angles_batch(_as_lengths(t))[0]))


def triangle_area(t) -> float:
    return float(areas_batch(_as_lengths(t))[0])


def circumradius(t) -> float:
    """R = abc / (4 area)"""
    return float(circumradii_batch(_as_lengths(t))[0])


def corner_area(ell: float, alpha_opposite: float) -> float:
    """Signed circumcentric half-region of one edge inside one triangle: l^2 cot(alpha) / 8.

    Negative for obtuse alpha.
    """
    return float(ell ** 2 * np.cos(alpha_opposite) / np.sin(alpha_opposite) / 8.0)


def clausen2(theta):
    """Clausen function Cl2 on any real input (vectorised).

    Reduces to (-pi, pi] and sums the Bernoulli-type series, which
    converges like 4^-n there.
    """
    theta = np.asarray(theta, dtype=float)
    t = np.remainder(theta + np.pi, 2.0 * np.pi) - np.pi
    abs_t = np.abs(t)
    with np.errstate(divide='ignore', invalid='ignore'):
        log_term = np.where(abs_t > 0.0, t * np.log(abs_t), 0.0)
    value = t - log_term + t * P.polyval(t * t, _CLAUSEN_COEFFS)
    return value if value.ndim else float(value)


def lobachevsky(x):
    """Milnor's Lobachevsky function L(x) = -int_0^x log|2 sin t| dt = Cl2(2x) / 2."""
    value = 0.5 * clausen2(2.0 * np.asarray(x, dtype=float))
    return value if np.ndim(value) else float(value)


def face_energy_batch(lengths: np.ndarray) -> np.ndarray:
    """Per-face energy term 2 f(log a, log b, log c) - pi (log a + log b + log c)."""
    log_l = np.log(lengths)
    angles = angles_batch(lengths)
    f = np.sum(angles * log_l, axis=1) + np.sum(lobachevsky(angles), axis=1)
    return 2.0 * f - np.pi * log_l.sum(axis=1)


def f_energy(x: float, y: float, z: float) -> float:
    """f(x, y, z) = alpha x + beta y + gamma z + L(alpha) + L(beta) + L(gamma)

    where alpha, beta, gamma are the angles of the triangle with sides
    e^x, e^y, e^z opposite those sides.
    """
    logs = np.array([x, y, z], dtype=float)
    lengths = _as_lengths(np.exp(logs))
    angles = angles_batch(lengths)[0]
    return float(np.dot(angles, logs) + np.sum(lobachevsky(angles)))

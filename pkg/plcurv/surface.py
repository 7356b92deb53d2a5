"""Half-edge combinatorics of closed oriented triangulated surfaces.

Half-edge ``h = 3 f + k`` is side ``k`` of face ``f``: it runs from corner
``k`` to corner ``k + 1`` and sits opposite corner ``k + 2`` (mod 3). Edge ids
label unordered pairs of half-edges and stay fixed across flips, so data
indexed by edge survives a flip with one entry rewritten. Loops and multiple
edges between the same vertices are ordinary edges here.
"""

from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .logging import get_logger

logger = get_logger(__name__)

__all__ = [
    'SurfaceError', 'FlipError', 'MarkedSurface', 'build_surface',
    'euler_characteristic', 'flip_edge',
]


class SurfaceError(ValueError):
    """Face list does not describe a closed oriented connected triangulated surface."""


class FlipError(ValueError):
    """Edge cannot be flipped (both sides belong to the same face)."""


class MarkedSurface:
    """
    Closed oriented triangulated surface with marked points as vertices.

    Attributes:
        face_vertices: (F, 3) vertex at each corner
        face_edges: (F, 3) edge id of each side
        twin: (3F,) opposite half-edge
        edge_halfedges: (E, 2) the two half-edges of each edge
        n_vertices: number of marked points
    """

    def __init__(
        self,
        face_vertices: np.ndarray,
        face_edges: np.ndarray,
        twin: np.ndarray,
        edge_halfedges: np.ndarray,
        n_vertices: int,
        writable: bool = False,
    ):
        self.face_vertices = face_vertices
        self.face_edges = face_edges
        self.twin = twin
        self.edge_halfedges = edge_halfedges
        self.n_vertices = int(n_vertices)
        if not writable:
            for arr in (face_vertices, face_edges, twin, edge_halfedges):
                arr.setflags(write=False)

    @property
    def n_faces(self) -> int:
        return self.face_vertices.shape[0]

    @property
    def n_edges(self) -> int:
        return self.edge_halfedges.shape[0]

    @property
    def n_halfedges(self) -> int:
        return 3 * self.n_faces

    @property
    def chi(self) -> int:
        """Euler characteristic |V| - |E| + |F|; flips leave it unchanged."""
        return self.n_vertices - self.n_edges + self.n_faces

    @property
    def genus(self) -> int:
        return (2 - self.chi) // 2

    @staticmethod
    def next(h: int) -> int:
        return 3 * (h // 3) + (h % 3 + 1) % 3

    @staticmethod
    def prev(h: int) -> int:
        return 3 * (h // 3) + (h % 3 + 2) % 3

    def origin(self, h: int) -> int:
        return int(self.face_vertices.flat[h])

    def dest(self, h: int) -> int:
        return int(self.face_vertices.flat[self.next(h)])

    def opposite_vertex(self, h: int) -> int:
        return int(self.face_vertices.flat[self.prev(h)])

    def edge_of(self, h: int) -> int:
        return int(self.face_edges.flat[h])

    def edge_endpoints(self, e: int) -> Tuple[int, int]:
        h = int(self.edge_halfedges[e, 0])
        return self.origin(h), self.dest(h)

    def vertex_halfedges(self, v: int) -> List[int]:
        """Outgoing half-edges of v in rotation order (its corner orbit)."""
        hits = np.flatnonzero(self.face_vertices.ravel() == v)
        if hits.size == 0:
            raise SurfaceError(f'Vertex {v} does not exist')
        start = int(hits[0])
        orbit = [start]
        h = int(self.twin[self.prev(start)])
        while h != start:
            orbit.append(h)
            h = int(self.twin[self.prev(h)])
        return orbit

    def vertex_degrees(self) -> np.ndarray:
        """Corners per vertex; a loop counts at both of its ends."""
        return np.bincount(self.face_vertices.ravel(), minlength=self.n_vertices)

    def canonical_form(self) -> Tuple:
        """Face set invariant under face reordering and corner rotation."""
        faces = []
        for verts, edges in zip(self.face_vertices.tolist(), self.face_edges.tolist()):
            corners = list(zip(verts, edges))
            faces.append(min(tuple(corners[k:] + corners[:k]) for k in range(3)))
        return tuple(sorted(faces))

    def copy(self, writable: bool = False) -> 'MarkedSurface':
        return MarkedSurface(
            self.face_vertices.copy(), self.face_edges.copy(), self.twin.copy(),
            self.edge_halfedges.copy(), self.n_vertices, writable=writable,
        )

    def flip(self, e: int) -> 'MarkedSurface':
        """New surface with edge e flipped; this one is unchanged."""
        flipped = self.copy(writable=True)
        flipped._flip_inplace(e)
        return flipped.copy()

    def flip_quad(self, e: int) -> Tuple[int, int, int, int, int, int, int, int]:
        """Describe the quadrilateral around e.

        Returns (i, j, k, l, e_jk, e_ki, e_il, e_lj): e runs i -> j in the first
        face (i, j, k), the second face is (j, i, l).
        """
        h, t = (int(x) for x in self.edge_halfedges[e])
        f0, k0 = divmod(h, 3)
        f1, k1 = divmod(t, 3)
        fv, fe = self.face_vertices, self.face_edges
        return (
            int(fv[f0, k0]), int(fv[f0, (k0 + 1) % 3]),
            int(fv[f0, (k0 + 2) % 3]), int(fv[f1, (k1 + 2) % 3]),
            int(fe[f0, (k0 + 1) % 3]), int(fe[f0, (k0 + 2) % 3]),
            int(fe[f1, (k1 + 1) % 3]), int(fe[f1, (k1 + 2) % 3]),
        )

    def _flip_inplace(self, e: int):
        h, t = (int(x) for x in self.edge_halfedges[e])
        f0, f1 = h // 3, t // 3
        if f0 == f1:
            raise FlipError(f'Edge {e} has the same face {f0} on both sides')

        i, j, k, l, e_jk, e_ki, e_il, e_lj = self.flip_quad(e)
        self.face_vertices[f0] = (l, k, i)
        self.face_edges[f0] = (e, e_ki, e_il)
        self.face_vertices[f1] = (k, l, j)
        self.face_edges[f1] = (e, e_lj, e_jk)

        local = [3 * f0 + c for c in range(3)] + [3 * f1 + c for c in range(3)]
        for x in {e, e_jk, e_ki, e_il, e_lj}:
            slots = [int(s) for s in self.edge_halfedges[x] if s // 3 not in (f0, f1)]
            slots += [s for s in local if self.face_edges.flat[s] == x]
            slots.sort()
            self.edge_halfedges[x] = slots
            self.twin[slots[0]] = slots[1]
            self.twin[slots[1]] = slots[0]

    def __repr__(self):
        return (f'MarkedSurface(V={self.n_vertices}, E={self.n_edges}, '
                f'F={self.n_faces}, chi={self.chi})')


def _infer_edges(faces: np.ndarray) -> np.ndarray:
    ids = {}
    face_edges = np.empty_like(faces)
    for f, face in enumerate(faces.tolist()):
        for k in range(3):
            key = tuple(sorted((face[k], face[(k + 1) % 3])))
            face_edges[f, k] = ids.setdefault(key, len(ids))
    return face_edges


def build_surface(
    faces: Sequence[Sequence[int]],
    edge_ids: Optional[Sequence[Sequence[int]]] = None,
    n_vertices: Optional[int] = None,
) -> MarkedSurface:
    """
    Assemble and validate a MarkedSurface.

    Args:
        faces: oriented vertex triples, 0-based
        edge_ids: edge id of each side (side k joins corners k and k+1);
            inferred from unordered vertex pairs when omitted, which only
            works for surfaces without multi-edges
        n_vertices: vertex count, defaults to max id + 1

    Raises:
        SurfaceError: non-manifold edge or vertex, orientation mismatch,
            disconnected complex, unused or out-of-range vertex ids
    """
    face_vertices = np.array(faces, dtype=np.int64)
    if face_vertices.ndim != 2 or face_vertices.shape[1] != 3 or face_vertices.shape[0] == 0:
        raise SurfaceError('Face list must be a non-empty list of vertex triples')
    n_faces = face_vertices.shape[0]
    if face_vertices.min() < 0:
        raise SurfaceError('Vertex ids must be non-negative')
    if n_vertices is None:
        n_vertices = int(face_vertices.max()) + 1
    if face_vertices.max() >= n_vertices:
        raise SurfaceError(f'Vertex id {int(face_vertices.max())} out of range for {n_vertices} vertices')
    unused = np.flatnonzero(np.bincount(face_vertices.ravel(), minlength=n_vertices) == 0)
    if unused.size:
        raise SurfaceError(f'Vertex {int(unused[0])} is not used by any face')

    if edge_ids is None:
        face_edges = _infer_edges(face_vertices)
    else:
        face_edges = np.array(edge_ids, dtype=np.int64)
        if face_edges.shape != face_vertices.shape:
            raise SurfaceError('Edge id table must have one id per face side')

    n_edges = int(face_edges.max()) + 1
    counts = np.bincount(face_edges.ravel(), minlength=n_edges)
    if face_edges.min() < 0 or np.any(counts == 0):
        raise SurfaceError('Edge ids must be contiguous from 0')
    bad = np.flatnonzero(counts != 2)
    if bad.size:
        e = int(bad[0])
        raise SurfaceError(f'Non-manifold edge {e}: appears in {int(counts[e])} face slots, expected 2')

    order = np.argsort(face_edges.ravel(), kind='stable')
    edge_halfedges = order.reshape(n_edges, 2).astype(np.int64)
    twin = np.empty(3 * n_faces, dtype=np.int64)
    twin[edge_halfedges[:, 0]] = edge_halfedges[:, 1]
    twin[edge_halfedges[:, 1]] = edge_halfedges[:, 0]

    origin = face_vertices.ravel()
    halfedges = np.arange(3 * n_faces)
    dest = face_vertices[halfedges // 3, (halfedges % 3 + 1) % 3]
    mismatch = np.flatnonzero((origin[twin] != dest) | (dest[twin] != origin))
    if mismatch.size:
        e = int(face_edges.flat[mismatch[0]])
        raise SurfaceError(f'Orientation mismatch on edge {e}: both sides traverse it in the same direction')

    adjacency = coo_matrix(
        (np.ones(3 * n_faces), (halfedges // 3, twin // 3)), shape=(n_faces, n_faces)
    )
    n_components, _ = connected_components(adjacency, directed=False)
    if n_components != 1:
        raise SurfaceError(f'Complex is disconnected ({n_components} components)')

    # Rotation around a vertex: outgoing h -> twin(prev(h)).
    prev = 3 * (halfedges // 3) + (halfedges % 3 + 2) % 3
    rotation = coo_matrix(
        (np.ones(3 * n_faces), (halfedges, twin[prev])), shape=(3 * n_faces, 3 * n_faces)
    )
    n_orbits, labels = connected_components(rotation, directed=False)
    if n_orbits != n_vertices:
        per_vertex = np.zeros(n_vertices, dtype=np.int64)
        for orbit in range(n_orbits):
            per_vertex[origin[np.flatnonzero(labels == orbit)[0]]] += 1
        v = int(np.flatnonzero(per_vertex > 1)[0])
        raise SurfaceError(f'Non-manifold vertex {v}: its corners form {int(per_vertex[v])} separate fans')

    surface = MarkedSurface(face_vertices, face_edges, twin, edge_halfedges, n_vertices)
    if surface.chi > 2 or surface.chi % 2:
        raise SurfaceError(f'Euler characteristic {surface.chi} is not that of a closed oriented surface')
    logger.debug('built %r', surface)
    return surface


def euler_characteristic(s: MarkedSurface) -> int:
    return s.chi


def flip_edge(s: MarkedSurface, e: int) -> MarkedSurface:
    """Replace edge e (diagonal ij of quad ikjl) by kl; returns a new surface."""
    return s.flip(e)


def faces_with_edges(s: MarkedSurface) -> Iterable[Tuple[Tuple[int, int, int], Tuple[int, int, int]]]:
    """(vertex triple, edge triple) per face, the input format of build_surface."""
    for verts, edges in zip(s.face_vertices.tolist(), s.face_edges.tolist()):
        yield tuple(verts), tuple(edges)

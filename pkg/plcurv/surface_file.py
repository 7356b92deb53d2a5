"""Plain-text surface files and wavefront import.

Format::

    plfsurf 1
    vertices <n>
    e <id> <i> <j>                 # optional, needed for loops and multi-edges
    f <i> <j> <k> [<e_ij> <e_jk> <e_ki>]
    len <edge-id> <value>          # or: len <i> <j> <value>

Vertices are 0-based. Blank lines and ``#`` comments are ignored. The
canonical form written by ``serialize_surface_file`` lists every edge and
every face with edge ids, and lengths in shortest round-trip notation.
"""

import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import meshio
import numpy as np

from .conformal import DiscreteMetric, EPS_DELAUNAY, delaunay_scores, edge_vertices
from .logging import get_logger, log_with_context
from .surface import MarkedSurface, SurfaceError, build_surface

logger = get_logger(__name__)

__all__ = [
    'HEADER', 'SurfaceFileError', 'ObjImportError', 'SurfaceFile',
    'parse_surface_file', 'read_surface_file', 'serialize_surface_file',
    'write_surface_file', 'atomic_write_text', 'atomic_write_texts', 'import_obj',
    'non_delaunay_edges',
]

HEADER = 'plfsurf 1'


class SurfaceFileError(ValueError):
    """Malformed surface file; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: Optional[int] = None):
        super().__init__(f'line {line}: {message}' if line is not None else message)
        self.line = line


class ObjImportError(ValueError):
    """Wavefront mesh is not a closed triangulated surface."""


@dataclass
class SurfaceFile:
    surface: MarkedSurface
    metric: DiscreteMetric


def _ints(tokens: List[str], line: int) -> List[int]:
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise SurfaceFileError(f'expected integers, got {" ".join(tokens)!r}', line) from None


def _length(token: str, line: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise SurfaceFileError(f'invalid length {token!r}', line) from None
    if not np.isfinite(value) or value <= 0:
        raise SurfaceFileError(f'length must be a positive number, got {token!r}', line)
    return value


def parse_surface_file(text: str) -> SurfaceFile:
    """
    Parse surface file text.

    Raises:
        SurfaceFileError: syntax errors, inconsistent records, or a face list
            that is not a valid surface
        DegenerateTriangleError: lengths violate a triangle inequality
    """
    n_vertices = None
    edges: Dict[int, Tuple[Tuple[int, int], int]] = {}
    faces: List[Tuple[List[int], Optional[List[int]], int]] = []
    lengths: List[Tuple[List[str], int]] = []
    seen_header = False

    for lineno, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split('#', 1)[0].split()
        if not tokens:
            continue
        if not seen_header:
            if ' '.join(tokens) != HEADER:
                raise SurfaceFileError(f'expected header {HEADER!r}', lineno)
            seen_header = True
            continue

        kind, args = tokens[0], tokens[1:]
        if kind == 'vertices':
            if n_vertices is not None:
                raise SurfaceFileError('duplicate vertices record', lineno)
            if len(args) != 1:
                raise SurfaceFileError('vertices record takes one count', lineno)
            n_vertices = _ints(args, lineno)[0]
            if n_vertices < 1:
                raise SurfaceFileError('vertex count must be at least 1', lineno)
        elif kind == 'e':
            if len(args) != 3:
                raise SurfaceFileError('edge record is "e <id> <i> <j>"', lineno)
            eid, i, j = _ints(args, lineno)
            if eid in edges:
                raise SurfaceFileError(f'edge {eid} declared twice', lineno)
            edges[eid] = ((i, j), lineno)
        elif kind == 'f':
            if len(args) not in (3, 6):
                raise SurfaceFileError('face record is "f i j k" or "f i j k e_ij e_jk e_ki"', lineno)
            values = _ints(args, lineno)
            faces.append((values[:3], values[3:] or None, lineno))
        elif kind == 'len':
            if len(args) not in (2, 3):
                raise SurfaceFileError('length record is "len <edge-id> <value>" or "len <i> <j> <value>"', lineno)
            lengths.append((args, lineno))
        else:
            raise SurfaceFileError(f'unknown record {kind!r}', lineno)

    if not seen_header:
        raise SurfaceFileError(f'missing header {HEADER!r}', 1)
    if n_vertices is None:
        raise SurfaceFileError('missing vertices record')
    if not faces:
        raise SurfaceFileError('no faces')

    for verts, _, lineno in faces:
        if any(v < 0 or v >= n_vertices for v in verts):
            raise SurfaceFileError(f'vertex id out of range 0..{n_vertices - 1}', lineno)

    surface = _build(n_vertices, edges, faces)
    metric = _lengths(surface, lengths)
    metric.validate(surface)
    return SurfaceFile(surface, metric)


def _build(n_vertices, edges, faces) -> MarkedSurface:
    with_ids = [f for f in faces if f[1] is not None]
    if with_ids and len(with_ids) != len(faces):
        missing = next(f for f in faces if f[1] is None)
        raise SurfaceFileError('either all faces carry edge ids or none do', missing[2])

    if with_ids:
        for verts, ids, lineno in faces:
            for k, eid in enumerate(ids):
                if eid in edges:
                    pair = {verts[k], verts[(k + 1) % 3]}
                    if set(edges[eid][0]) != pair:
                        raise SurfaceFileError(f'face side {sorted(pair)} uses edge {eid} declared as {edges[eid][0]}', lineno)
        edge_ids = [ids for _, ids, _ in faces]
    elif edges:
        by_pair = {}
        for eid, ((i, j), lineno) in edges.items():
            key = (min(i, j), max(i, j))
            if key in by_pair:
                raise SurfaceFileError(f'edges {by_pair[key]} and {eid} join the same vertices; give faces explicit edge ids', lineno)
            by_pair[key] = eid
        edge_ids = []
        for verts, _, lineno in faces:
            row = []
            for k in range(3):
                key = tuple(sorted((verts[k], verts[(k + 1) % 3])))
                if key not in by_pair:
                    raise SurfaceFileError(f'no edge record for side {key}', lineno)
                row.append(by_pair[key])
            edge_ids.append(row)
    else:
        edge_ids = None

    try:
        return build_surface([v for v, _, _ in faces], edge_ids, n_vertices)
    except SurfaceError as exc:
        raise SurfaceFileError(str(exc)) from exc


def _lengths(surface: MarkedSurface, records) -> DiscreteMetric:
    ends = edge_vertices(surface)
    pair_count: Dict[Tuple[int, int], List[int]] = {}
    for eid, (i, j) in enumerate(ends.tolist()):
        pair_count.setdefault((min(i, j), max(i, j)), []).append(eid)

    values = np.full(surface.n_edges, np.nan)
    for args, lineno in records:
        if len(args) == 2:
            eid = _ints(args[:1], lineno)[0]
            if not 0 <= eid < surface.n_edges:
                raise SurfaceFileError(f'unknown edge {eid}', lineno)
        else:
            i, j = _ints(args[:2], lineno)
            candidates = pair_count.get((min(i, j), max(i, j)), [])
            if len(candidates) != 1:
                what = 'no edge' if not candidates else f'{len(candidates)} edges'
                raise SurfaceFileError(f'{what} between vertices {i} and {j}; use an edge id', lineno)
            eid = candidates[0]
        if not np.isnan(values[eid]):
            raise SurfaceFileError(f'length of edge {eid} given twice', lineno)
        values[eid] = _length(args[-1], lineno)

    missing = np.flatnonzero(np.isnan(values))
    if missing.size:
        raise SurfaceFileError(f'no length for edge {int(missing[0])}')
    return DiscreteMetric(values)


def read_surface_file(path: Path) -> SurfaceFile:
    return parse_surface_file(Path(path).read_text())


def serialize_surface_file(surface: MarkedSurface, metric: DiscreteMetric) -> str:
    """Canonical text; parse_surface_file of it reproduces the same surface and lengths."""
    lines = [HEADER, f'vertices {surface.n_vertices}']
    for eid, (i, j) in enumerate(edge_vertices(surface).tolist()):
        lines.append(f'e {eid} {i} {j}')
    for verts, ids in zip(surface.face_vertices.tolist(), surface.face_edges.tolist()):
        lines.append('f ' + ' '.join(str(x) for x in verts + ids))
    for eid, value in enumerate(metric.lengths.tolist()):
        lines.append(f'len {eid} {value!r}')
    return '\n'.join(lines) + '\n'


def atomic_write_text(path: Path, text: str):
    """Write via a temporary file in the target directory, renamed into place on success."""
    atomic_write_texts({path: text})


def atomic_write_texts(files: Dict[Path, str]):
    """Write several files so that either all of them appear or none does.

    Every text is staged in a temporary file next to its target first; the
    renames only start once all of them are on disk. Targets already renamed
    are removed again when a later rename fails.
    """
    staged: List[Tuple[str, Path]] = []
    done: List[Path] = []
    try:
        for path, text in files.items():
            path = Path(path)
            fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f'.{path.name}.', suffix='.tmp')
            staged.append((tmp, path))
            with os.fdopen(fd, 'w', newline='\n') as handle:
                handle.write(text)
        for tmp, path in staged:
            os.replace(tmp, path)
            done.append(path)
    except BaseException:
        for tmp, _ in staged:
            if os.path.exists(tmp):
                os.unlink(tmp)
        for path in done:
            path.unlink(missing_ok=True)
        raise


def write_surface_file(path: Path, sf: SurfaceFile):
    atomic_write_text(path, serialize_surface_file(sf.surface, sf.metric))


def non_delaunay_edges(sf: SurfaceFile) -> List[int]:
    scores = delaunay_scores(sf.surface, sf.metric.lengths)
    return [int(e) for e in np.flatnonzero(scores < -EPS_DELAUNAY)]


def import_obj(path: Path) -> SurfaceFile:
    """
    Intrinsic surface of a closed triangulated wavefront mesh.

    Edge lengths are Euclidean distances between the vertex positions.
    Non-Delaunay edges are logged as a warning; they are legal input.

    Raises:
        ObjImportError: non-triangular faces, boundary or non-manifold edges,
            or an otherwise invalid face list
    """
    mesh = meshio.read(str(path), file_format='obj')
    other = sorted({block.type for block in mesh.cells if block.type != 'triangle'})
    if other:
        raise ObjImportError(f'{path}: non-triangular faces ({", ".join(other)})')
    triangles = np.concatenate(
        [block.data for block in mesh.cells if block.type == 'triangle'] or [np.zeros((0, 3), dtype=int)]
    ).astype(np.int64)
    if triangles.shape[0] == 0:
        raise ObjImportError(f'{path}: no faces')

    sides = np.sort(np.concatenate([triangles[:, [0, 1]], triangles[:, [1, 2]], triangles[:, [2, 0]]]), axis=1)
    pairs, counts = np.unique(sides, axis=0, return_counts=True)
    if np.any(counts == 1):
        i, j = pairs[np.flatnonzero(counts == 1)[0]]
        raise ObjImportError(f'{path}: boundary edge ({int(i)}, {int(j)})')
    if np.any(counts > 2):
        i, j = pairs[np.flatnonzero(counts > 2)[0]]
        raise ObjImportError(f'{path}: non-manifold edge ({int(i)}, {int(j)})')

    try:
        surface = build_surface(triangles, n_vertices=mesh.points.shape[0])
    except SurfaceError as exc:
        raise ObjImportError(f'{path}: {exc}') from exc

    ends = edge_vertices(surface)
    points = np.asarray(mesh.points, dtype=float)
    lengths = np.linalg.norm(points[ends[:, 0]] - points[ends[:, 1]], axis=1)
    sf = SurfaceFile(surface, DiscreteMetric(lengths))
    sf.metric.validate(surface)

    flagged = non_delaunay_edges(sf)
    if flagged:
        log_with_context(
            logger, 'warning', f'{len(flagged)} non-Delaunay edges in {path}',
            edges=flagged,
        )
    return sf

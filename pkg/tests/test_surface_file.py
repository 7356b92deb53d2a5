import numpy as np
import pytest

from plcurv.conformal import edge_vertices
from plcurv.families import FamilyConfig, genus2_family
from plcurv.geometry import DegenerateTriangleError
from plcurv.surface_file import (
    ObjImportError,
    SurfaceFileError,
    atomic_write_text,
    atomic_write_texts,
    import_obj,
    non_delaunay_edges,
    parse_surface_file,
    read_surface_file,
    serialize_surface_file,
    write_surface_file,
)

from helpers import fixtures_dir, load

TETRAHEDRON = """\
plfsurf 1
vertices 4
f 0 1 2
f 0 2 3
f 0 3 1
f 1 3 2
len 0 1 1
len 1 2 1
len 0 2 1
len 2 3 1
len 0 3 1
len 1 3 1
"""


def test_parse_tetrahedron():
    sf = parse_surface_file(TETRAHEDRON)
    assert (sf.surface.n_vertices, sf.surface.n_edges, sf.surface.n_faces) == (4, 6, 4)
    assert np.array_equal(sf.metric.lengths, np.ones(6))


def test_comments_and_blank_lines():
    text = "# leading comment\n\n" + TETRAHEDRON.replace("f 0 2 3", "f 0 2 3   # second face\n")
    assert parse_surface_file(text).surface.canonical_form() == parse_surface_file(TETRAHEDRON).surface.canonical_form()


@pytest.mark.parametrize(
    "name,counts",
    [
        ("tetrahedron.plfsurf", (4, 6, 4, 2)),
        ("perturbed_tetrahedron.plfsurf", (4, 6, 4, 2)),
        ("rhombus.plfsurf", (4, 6, 4, 2)),
        ("torus.plfsurf", (9, 27, 18, 0)),
        ("genus2.plfsurf", (2, 12, 8, -2)),
    ],
)
def test_fixtures(name, counts):
    s = load(name).surface
    assert (s.n_vertices, s.n_edges, s.n_faces, s.chi) == counts


def test_serialized_text_is_canonical(genus2, torus, tmp_path):
    for sf in (genus2, torus):
        text = serialize_surface_file(sf.surface, sf.metric)
        again = parse_surface_file(text)
        assert serialize_surface_file(again.surface, again.metric) == text
        assert np.array_equal(again.metric.lengths, sf.metric.lengths)

        path = tmp_path / "copy.plfsurf"
        write_surface_file(path, sf)
        assert path.read_text() == text
        assert read_surface_file(path).surface.canonical_form() == sf.surface.canonical_form()


def test_serialized_lengths_round_trip_exactly():
    member = genus2_family(FamilyConfig(b0=3.0, c0=3.15, v=0.123456789))
    again = parse_surface_file(serialize_surface_file(member.surface, member.metric))
    assert np.array_equal(again.metric.lengths, member.metric.lengths)


def test_genus2_fixture_matches_family(genus2):
    member = genus2_family(FamilyConfig(b0=1.6, c0=1.75))
    assert genus2.surface.canonical_form() == member.surface.canonical_form()
    assert np.array_equal(genus2.metric.lengths, member.metric.lengths)


def test_edge_records_with_pair_lengths():
    text = "\n".join([
        "plfsurf 1",
        "vertices 4",
        "e 0 0 1", "e 1 1 2", "e 2 2 0", "e 3 2 3", "e 4 3 0", "e 5 3 1",
        "f 0 1 2", "f 0 2 3", "f 0 3 1", "f 1 3 2",
        "len 0 1.0", "len 1 1.0", "len 2 0 1.5", "len 3 1.0", "len 4 1.0", "len 5 1.0",
    ])
    sf = parse_surface_file(text)
    ends = edge_vertices(sf.surface)
    e = [k for k, (i, j) in enumerate(ends.tolist()) if {i, j} == {0, 2}][0]
    assert e == 2
    assert sf.metric.lengths[2] == 1.5


def _error(text):
    with pytest.raises(SurfaceFileError) as info:
        parse_surface_file(text)
    return info.value


@pytest.mark.parametrize(
    "old,new,line,match",
    [
        ("plfsurf 1", "plfsurf 2", 1, "header"),
        ("f 0 2 3", "q 0 2 3", 4, "unknown record"),
        ("f 0 2 3", "f 0 2 x", 4, "integers"),
        ("f 0 2 3", "f 0 2 3 1", 4, "face record"),
        ("f 0 2 3", "f 0 2 7", 4, "out of range"),
        ("len 1 2 1", "len 1 2 -1", 8, "positive"),
        ("len 1 2 1", "len 1 2 abc", 8, "invalid length"),
        ("len 1 2 1", "len 0 1 1", 8, "given twice"),
        ("vertices 4", "vertices 0", 2, "at least 1"),
    ],
)
def test_errors_name_the_line(old, new, line, match):
    err = _error(TETRAHEDRON.replace(old, new, 1))
    assert err.line == line
    assert match in str(err)


def test_structural_errors():
    assert "no length for edge" in str(_error(TETRAHEDRON.replace("len 1 3 1\n", "")))
    assert "missing vertices" in str(_error(TETRAHEDRON.replace("vertices 4\n", "")))
    assert "no faces" in str(_error("plfsurf 1\nvertices 1\n"))
    assert "Orientation" in str(_error(TETRAHEDRON.replace("f 1 3 2", "f 1 2 3")))
    assert "missing header" in str(_error(""))


def test_mixed_edge_ids_are_rejected():
    text = TETRAHEDRON.replace("f 0 1 2", "f 0 1 2 0 1 2")
    assert _error(text).line == 4


def test_pair_lengths_are_ambiguous_on_multi_edges(genus2):
    text = serialize_surface_file(genus2.surface, genus2.metric)
    lines = [ln for ln in text.splitlines() if not ln.startswith("len 4 ")]
    lines.append("len 0 1 1.6")
    err = _error("\n".join(lines))
    assert "use an edge id" in str(err)


def test_degenerate_lengths():
    with pytest.raises(DegenerateTriangleError):
        parse_surface_file(TETRAHEDRON.replace("len 0 1 1", "len 0 1 2.5"))


def test_atomic_write_replaces(tmp_path):
    path = tmp_path / "out.txt"
    path.write_text("old")
    atomic_write_text(path, "new\n")
    assert path.read_text() == "new\n"
    assert [p.name for p in tmp_path.iterdir()] == ["out.txt"]


def test_atomic_write_is_all_or_nothing(tmp_path):
    first = tmp_path / "first.txt"
    blocked = tmp_path / "blocked"
    blocked.mkdir()
    with pytest.raises(OSError):
        atomic_write_texts({first: "one\n", blocked: "two\n"})
    assert not first.exists()
    assert sorted(p.name for p in tmp_path.iterdir()) == ["blocked"]

    second = tmp_path / "second.txt"
    atomic_write_texts({first: "one\n", second: "two\n"})
    assert (first.read_text(), second.read_text()) == ("one\n", "two\n")


def test_import_cube(cube):
    s = cube.surface
    assert (s.n_vertices, s.n_edges, s.n_faces, s.chi) == (8, 18, 12, 2)
    assert np.sum(np.isclose(cube.metric.lengths, 1.0)) == 12
    assert np.sum(np.isclose(cube.metric.lengths, np.sqrt(2))) == 6
    # the square diagonals are Delaunay-degenerate, not violations
    assert non_delaunay_edges(cube) == []


def test_import_flags_non_delaunay_edges():
    sf = import_obj(fixtures_dir / "flat_tetrahedron.obj")
    flagged = non_delaunay_edges(sf)
    ends = edge_vertices(sf.surface)
    assert {1, 2} in [set(ends[e]) for e in flagged]


def test_import_rejects_open_meshes(tmp_path):
    path = tmp_path / "open.obj"
    path.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nf 1 3 2\nf 1 2 4\nf 2 3 4\n")
    with pytest.raises(ObjImportError, match="boundary"):
        import_obj(path)


def test_import_rejects_quads(tmp_path):
    path = tmp_path / "quad.obj"
    path.write_text("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\nf 1 4 3 2\n")
    with pytest.raises(ObjImportError, match="non-triangular"):
        import_obj(path)

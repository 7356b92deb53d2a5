import numpy as np
import pytest
from pydantic import ValidationError

from plcurv.conformal import curvature_report, in_penner_cell
from plcurv.families import (
    GENUS2_LABELS,
    TET_LABELS,
    FamilyConfig,
    FamilyKind,
    closed_form_g,
    closed_form_h,
    eval_g,
    eval_h,
    family_member,
    family_mismatch,
    genus2_family,
    tetrahedron_family,
)
from plcurv.geometry import triangle_area

PARAMETERS = [(1.6, 1.75), (2.2, 2.35), (3.0, 3.15), (3.2, 3.35), (1.0, 1.0)]


def sample_points(cfg, n=7):
    lo, hi = cfg.interval
    return np.linspace(0.95 * lo, 0.95 * hi, n)


def test_config_validation():
    with pytest.raises(ValidationError):
        FamilyConfig(b0=0.9, c0=1.0)
    with pytest.raises(ValidationError):
        FamilyConfig(b0=1.0, c0=1.5)  # c0^2 > 1 + b0^2
    with pytest.raises(ValidationError):
        FamilyConfig(b0=1.6, c0=1.75, v=2.0)
    cfg = FamilyConfig(b0=1.6, c0=1.75)
    assert cfg.half_width == pytest.approx(np.log(1.6 ** 2 + 1.75 ** 2))
    assert cfg.interval == (-cfg.half_width, cfg.half_width)
    moved = cfg.with_v(0.5)
    assert (moved.b0, moved.c0, moved.v) == (1.6, 1.75, 0.5)


def test_tetrahedron_lengths():
    cfg = FamilyConfig(b0=2.2, c0=2.35, v=0.4)
    member = tetrahedron_family(cfg)
    s = np.exp(0.2)
    expected = [1.0, np.exp(0.4), 2.2 * s, 2.2 * s, 2.35 * s, 2.35 * s]
    assert np.allclose(member.metric.lengths, expected, rtol=1.0e-15)
    assert member.labels == TET_LABELS
    assert member.surface.chi == 2
    assert member.u.tolist() == [0.0, 0.0, 0.4, 0.4]


def test_genus2_lengths():
    cfg = FamilyConfig(b0=3.0, c0=3.15, v=-0.6)
    member = genus2_family(cfg)
    s = np.exp(-0.3)
    loops = [1.0, 1.0, np.exp(-0.6), np.exp(-0.6)]
    assert np.allclose(member.metric.lengths, loops + [3.0 * s] * 4 + [3.15 * s] * 4, rtol=1.0e-15)
    assert member.labels == GENUS2_LABELS
    s2 = member.surface
    assert (s2.n_vertices, s2.n_edges, s2.n_faces, s2.chi) == (2, 12, 8, -2)
    ends = [s2.edge_endpoints(e) for e in range(12)]
    assert ends[:2] == [(0, 0), (0, 0)]
    assert ends[2:4] == [(1, 1), (1, 1)]
    assert all(set(p) == {0, 1} for p in ends[4:])


def test_conformal_factor_of_members():
    assert FamilyKind.TET.u_of_v(0.4).tolist() == [0.0, 0.0, 0.4, 0.4]
    assert FamilyKind.GENUS2.u_of_v(-0.6).tolist() == [0.0, -0.6]
    for kind in FamilyKind:
        cfg = FamilyConfig(b0=3.0, c0=3.15, v=-0.6)
        assert np.array_equal(family_member(kind, cfg).u, kind.u_of_v(-0.6))


def test_family_member_dispatch():
    cfg = FamilyConfig(b0=1.6, c0=1.75)
    assert family_member(FamilyKind.TET, cfg).surface.n_vertices == 4
    assert family_member("genus2", cfg).surface.n_vertices == 2


@pytest.mark.parametrize("b0,c0", PARAMETERS)
def test_constant_curvature_at_zero(b0, c0):
    cfg = FamilyConfig(b0=b0, c0=c0)
    area = triangle_area((1.0, b0, c0))

    tet = tetrahedron_family(cfg)
    report = curvature_report(tet.surface, tet.metric)
    assert np.allclose(report.K, np.pi / area, rtol=1.0e-12)
    assert eval_g(cfg) == pytest.approx(0.0, abs=1.0e-12)
    assert closed_form_g(cfg) == 0.0

    g2 = genus2_family(cfg)
    report = curvature_report(g2.surface, g2.metric)
    assert np.allclose(report.K, -np.pi / (2 * area), rtol=1.0e-12)
    assert eval_h(cfg) == pytest.approx(0.0, abs=1.0e-12)
    assert closed_form_h(cfg) == 0.0


@pytest.mark.parametrize("b0,c0", PARAMETERS)
def test_mismatch_closed_forms(b0, c0):
    base = FamilyConfig(b0=b0, c0=c0)
    for v in sample_points(base):
        cfg = base.with_v(v)
        g, h = eval_g(cfg), eval_h(cfg)
        assert g == pytest.approx(closed_form_g(cfg), rel=1.0e-9, abs=1.0e-12)
        assert h == pytest.approx(-16 * closed_form_h(cfg), rel=1.0e-9, abs=1.0e-12)
        assert family_mismatch(FamilyKind.TET, cfg) == g
        assert family_mismatch(FamilyKind.GENUS2, cfg) == h


@pytest.mark.parametrize("b0,c0", PARAMETERS)
def test_mismatch_reflection(b0, c0):
    # v -> -v swaps the two triangle types and scales them by exp(-v)
    base = FamilyConfig(b0=b0, c0=c0)
    for v in sample_points(base):
        for fn in (eval_g, eval_h):
            assert fn(base.with_v(-v)) == pytest.approx(
                -np.exp(-2 * v) * fn(base.with_v(v)), rel=1.0e-9, abs=1.0e-12
            )


@pytest.mark.parametrize("b0,c0", PARAMETERS)
def test_members_stay_in_one_penner_cell(b0, c0):
    base = FamilyConfig(b0=b0, c0=c0)
    for v in sample_points(base):
        for build in (tetrahedron_family, genus2_family):
            member = build(base.with_v(v))
            assert in_penner_cell(member.surface, member.base_metric, member.u)
            assert curvature_report(member.surface, member.metric).flips == 0


def test_members_have_valid_triangles_up_to_the_ends():
    base = FamilyConfig(b0=2.2, c0=2.35)
    for v in base.interval:
        member = tetrahedron_family(base.with_v(v))
        assert member.metric.is_valid(member.surface)

import numpy as np
import pytest

from spiderspace.cells import build_complex, euler_characteristic as cell_chi
from spiderspace.mesh import (
    NonManifoldError,
    SurfaceMesh,
    build_mesh,
    check_orientation,
    euler_characteristic,
    export_obj,
    export_off,
    read_obj,
)
from spiderspace.model import InvalidParameterError, RegimeError, SpiderParams

# six-vertex triangulation of the real projective plane
RP2 = np.array([[0, 1, 2], [0, 2, 3], [0, 3, 4], [0, 4, 5], [0, 5, 1],
                [1, 2, 4], [2, 3, 5], [3, 4, 1], [4, 5, 2], [5, 1, 3]])


@pytest.fixture(scope="module")
def meshes():
    return {n: build_mesh(SpiderParams(n, 1.5), 8 if n < 6 else 4) for n in range(2, 7)}


@pytest.mark.parametrize("n, chi", [(2, 2), (3, 2), (4, 0), (5, -8), (6, -32)])
def test_mesh_euler_characteristic(meshes, n, chi):
    assert euler_characteristic(meshes[n]) == chi
    assert chi == cell_chi(build_complex(SpiderParams(n, 1.5)))


@pytest.mark.parametrize("n", range(2, 7))
def test_mesh_is_closed_welded_and_oriented(meshes, n):
    m = meshes[n]
    report = check_orientation(m)
    assert report and report.orientable and report.consistent and report.matches_rule
    assert m.max_weld_gap == 0.0
    assert set(np.unique(m.corner_count)) <= {1, 2, 4}
    for chart, sign in report.chart_signs.items():
        assert sign * chart.orientation_sign == report.chart_signs[m.charts[0]] * m.charts[0].orientation_sign


def test_unoriented_charts_still_carry_the_sign_rule():
    m = build_mesh(SpiderParams(4, 1.5), 4, orient=False)
    report = check_orientation(m)
    assert report.orientable and not report.consistent and not report
    assert report.matches_rule


def test_one_flipped_triangle_breaks_consistency(meshes):
    m = meshes[3]
    tris = m.tris.copy()
    tris[7] = tris[7, ::-1]
    bad = SurfaceMesh(m.verts, tris)
    report = check_orientation(bad)
    assert report.orientable and not report.consistent
    assert not report


def test_projective_plane_is_not_orientable():
    verts = np.random.default_rng(0).normal(size=(6, 3))
    m = SurfaceMesh(verts, RP2)
    assert euler_characteristic(m) == 1
    assert not check_orientation(m).orientable


def test_open_mesh_is_rejected():
    m = SurfaceMesh(np.zeros((4, 3)), np.array([[0, 1, 2], [0, 2, 3]]))
    with pytest.raises(NonManifoldError) as err:
        check_orientation(m)
    assert len(err.value.edges) == 4


def test_mesh_needs_large_generic_radius():
    for R in (0.5, 1.0, 2.0):
        with pytest.raises(RegimeError):
            build_mesh(SpiderParams(4, R))
    with pytest.raises(InvalidParameterError):
        build_mesh(SpiderParams(4, 1.5), 1)


def test_mesh_heights_separate_the_charts(meshes):
    m = meshes[2]
    # distinct vertices never coincide in (x, y, z)
    assert len(np.unique(np.round(m.verts, 12), axis=0)) == m.n_verts


def test_obj_round_trip(tmp_path, meshes):
    m = meshes[2]
    path = export_obj(m, tmp_path / "s2.obj")
    back = read_obj(path)
    assert (back.n_verts, back.n_tris, len(back.edges())) == (m.n_verts, m.n_tris, len(m.edges()))
    assert euler_characteristic(back) == 2
    np.testing.assert_array_equal(back.tris, m.tris)
    np.testing.assert_allclose(back.verts, m.verts, atol=1e-11)


def test_off_header(tmp_path, meshes):
    m = meshes[4]
    lines = export_off(m, tmp_path / "t.off").read_text().splitlines()
    assert lines[0] == "OFF"
    assert lines[1] == f"{m.n_verts} {m.n_tris} {len(m.edges())}"
    assert len(lines) == 2 + m.n_verts + m.n_tris


def test_empty_mesh_not_exported(tmp_path):
    empty = SurfaceMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=int))
    for writer in (export_obj, export_off):
        with pytest.raises(InvalidParameterError):
            writer(empty, tmp_path / "e.obj")
    assert not list(tmp_path.iterdir())

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lpimd.geometry import (QUAD4, SUPPORT, TRI3, BoundaryGroup, Element, Mesh, MeshError,
                            generate_lshape_mesh, generate_rect_mesh, in_box, load_mesh,
                            lshape_outline, tag_boundary, write_mesh)


def test_rect_quad_counts():
    m = generate_rect_mesh(2.0, 1.0, 2, 1, QUAD4)
    assert (m.num_nodes, m.num_elements) == (6, 2)
    assert m.area == pytest.approx(2.0, rel=1e-15)


def test_rect_tri_counts():
    m = generate_rect_mesh(1.0, 1.0, 1, 1, TRI3)
    assert (m.num_nodes, m.num_elements) == (4, 2)
    assert m.area == pytest.approx(1.0, rel=1e-15)


def test_rect_benchmark_density():
    m = generate_rect_mesh(2.0, 1.0, 64, 32, QUAD4)
    assert m.num_elements == 64 * 32
    assert m.area == pytest.approx(2.0, rel=1e-12)


def test_rect_auto_groups():
    m = generate_rect_mesh(3.0, 1.0, 3, 2)
    assert {g.tag for g in m.groups} == {"left", "right", "bottom", "top"}
    assert len(m.group("left").edges) == 2
    assert len(m.group("top").edges) == 3


@pytest.mark.parametrize("args", [(0.0, 1.0, 1, 1), (1.0, -1.0, 1, 1), (1.0, 1.0, 0, 1),
                                  (1.0, 1.0, 1, 2.5)])
def test_rect_invalid_arguments(args):
    with pytest.raises(ValueError):
        generate_rect_mesh(*args)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.1, 10), st.floats(0.1, 10), st.integers(1, 6), st.integers(1, 6),
       st.sampled_from([TRI3, QUAD4]))
def test_rect_area_is_sum_of_elements(length, height, nx, ny, kind):
    m = generate_rect_mesh(length, height, nx, ny, kind)
    total = sum(m.element_area(e) for e in range(m.num_elements))
    assert total == pytest.approx(length * height, rel=1e-12)
    assert m.area == pytest.approx(length * height, rel=1e-12)


def test_sharp_lshape_area():
    m = generate_lshape_mesh(2.0, 0.8, 0.0, target_h=0.2)
    assert m.area == pytest.approx(2.0 ** 2 - 1.2 ** 2, rel=1e-12)


def test_fillet_adds_the_corner_region():
    # the reentrant fillet fills the square [t, t+r]^2 minus the quarter disc;
    # with an n-chord polyline the disc part is the inscribed polygon sector
    leg, t, r, n = 2.0, 1.0, 0.3, 8
    m = generate_lshape_mesh(leg, t, r, target_h=0.1, fillet_segments=n)
    sector = 0.5 * r * r * n * math.sin(0.5 * math.pi / n)
    assert m.area == pytest.approx(leg ** 2 - (leg - t) ** 2 + r * r - sector, rel=1e-12)
    # and converges to the exact arc value as the polyline refines
    fine = generate_lshape_mesh(leg, t, r, target_h=0.1, fillet_segments=64)
    exact = leg ** 2 - (leg - t) ** 2 + (1 - math.pi / 4) * r * r
    assert abs(fine.area - exact) < abs(m.area - exact)
    assert fine.area == pytest.approx(exact, rel=1e-4)


def test_lshape_groups_and_orientation():
    m = generate_lshape_mesh(2.0, 1.0, 0.25, target_h=0.15)
    sup = m.group("support")
    load = m.group("load")
    assert sup.role == SUPPORT
    for eid, loc in sup.edges:
        assert np.allclose(m.edge_coords(eid, loc)[:, 1], 2.0)
    for eid, loc in load.edges:
        assert np.allclose(m.edge_coords(eid, loc)[:, 0], 2.0)
    length = sum(np.linalg.norm(np.diff(m.edge_coords(*e), axis=0)) for e in load.edges)
    assert length == pytest.approx(1.0)
    assert all(m.element_area(e) > 0 for e in range(m.num_elements))


def test_lshape_outline_is_counter_clockwise():
    xy = lshape_outline(2.0, 1.0, 0.25)
    x, y = xy[:, 0], xy[:, 1]
    assert 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y) > 0


@pytest.mark.parametrize("r", [1.0, 1.5, -0.1])
def test_infeasible_fillet(r):
    with pytest.raises(ValueError):
        generate_lshape_mesh(2.0, 1.0, r, target_h=0.2)


def test_quad_lshape_is_structured():
    m = generate_lshape_mesh(2.0, 1.0, 0.0, target_h=0.25, kind=QUAD4)
    assert m.kinds() == {QUAD4}
    assert m.area == pytest.approx(3.0, rel=1e-12)


def test_inverted_element_rejected():
    pts = np.array([[0, 0], [1, 0], [0, 1.0]])
    with pytest.raises(MeshError, match="element 0: non-positive Jacobian"):
        Mesh(pts, (Element(TRI3, (0, 2, 1)),))


def test_repeated_node_rejected():
    pts = np.array([[0, 0], [1, 0], [0, 1.0]])
    with pytest.raises(MeshError, match="element 0: repeated node"):
        Mesh(pts, (Element(TRI3, (0, 1, 1)),))


def test_interior_edge_cannot_be_grouped():
    m = generate_rect_mesh(2.0, 1.0, 2, 1)
    with pytest.raises(MeshError, match="not on the boundary"):
        m.with_group(BoundaryGroup("bad", ((0, 1),)))


def test_edge_in_two_support_groups_rejected():
    m = generate_rect_mesh(1.0, 1.0, 1, 1)
    m = tag_boundary(m, "a", in_box(0, 0, 0, 1), role=SUPPORT)
    with pytest.raises(MeshError):
        tag_boundary(m, "b", in_box(0, 0, 0, 1), role=SUPPORT)


def test_support_group_cannot_carry_traction():
    with pytest.raises(MeshError):
        BoundaryGroup("s", ((0, 0),), role=SUPPORT, traction=(1.0, 0.0))


@pytest.mark.parametrize("kind", [TRI3, QUAD4])
def test_mesh_round_trip(tmp_path, kind):
    m = generate_rect_mesh(2.0, 1.0, 3, 2, kind)
    m = tag_boundary(m, "tip", in_box(2, 2, 0, 1), traction=(0.0, -5.0))
    path = tmp_path / "m.txt"
    write_mesh(m, path)
    back = load_mesh(path)
    assert np.array_equal(back.points, m.points)
    assert back.elements == m.elements
    assert back.groups == m.groups


def test_round_trip_lshape(tmp_path):
    m = generate_lshape_mesh(2.0, 1.0, 0.25, target_h=0.2)
    write_mesh(m, tmp_path / "l.txt")
    back = load_mesh(tmp_path / "l.txt")
    assert np.array_equal(back.points, m.points)
    assert back.area == m.area


def test_load_mesh_reports_line_number(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("mesh2d 3 1 0\nn 0 0 0\nn 1 1 zero\nn 2 0 1\ne 0 tri3 0 1 2\n")
    with pytest.raises(MeshError, match=":3:"):
        load_mesh(path)


def test_load_mesh_reports_entity(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("mesh2d 3 1 0\nn 0 0 0\nn 1 1 0\nn 2 0 1\ne 0 tri3 0 2 1\n")
    with pytest.raises(MeshError, match="element 0"):
        load_mesh(path)

from itertools import product

import pytest
from hypothesis import given, strategies as st

from binets.lattice import (
    Face,
    Vertex,
    Window,
    crosses,
    dual_faces,
    dual_vertices,
    face_vertices,
    incident,
    vertex_edges,
    vertex_faces,
)


def test_incident_examples():
    assert incident(Vertex(0, 0), Face(0, 0))
    assert incident(Face(0, 0), Vertex(0, 0))
    assert not incident(Vertex(2, 2), Face(0, 0))
    assert not incident(Vertex(0, 0), Vertex(0, 1))
    assert incident(Vertex(0, 0, 0), Face(0, 0, 0, plane=12))
    assert not incident(Vertex(0, 0, 1), Face(0, 0, 0, plane=12))


def test_face_vertices_and_vertex_faces():
    assert face_vertices(Face(0, 0)) == [Vertex(0, 0), Vertex(1, 0), Vertex(1, 1), Vertex(0, 1)]
    w = Window.grid(3, 3)
    inc = vertex_faces(Vertex(1, 1), w)
    assert sorted(f.coords for f in inc.cells) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert not inc.boundary
    corner = vertex_faces(Vertex(0, 0), w)
    assert corner.cells == [Face(0, 0)] and corner.boundary
    inc3 = vertex_faces(Vertex(1, 1, 1), Window.box(3, 3, 3))
    assert len(inc3.cells) == 12 and not inc3.boundary
    for plane in (12, 13, 23):
        assert sum(f.plane == plane for f in inc3.cells) == 4
    for f in inc3.cells:
        assert incident(f, Vertex(1, 1, 1))


def brute_force_crosses_2d(m, n):
    """Quadruples (v, f, v', f') of adjacent vertices and adjacent faces, all incident."""
    w = Window.grid(m, n)
    verts, faces = w.vertices(), w.faces()
    found = set()
    for v, u in product(verts, verts):
        if sum(abs(a - b) for a, b in zip(v.coords, u.coords)) != 1 or v.coords > u.coords:
            continue
        fs = [f for f in faces if incident(v, f) and incident(u, f)]
        if len(fs) == 2:
            found.add((v, u))
    return found


@pytest.mark.parametrize("m,n", [(2, 2), (3, 3), (2, 5), (4, 3), (5, 6)])
def test_cross_count_2d(m, n):
    cs = crosses(Window.grid(m, n))
    assert len(cs) == (m - 2) * (n - 1) + (m - 1) * (n - 2)
    assert {(c.v, c.v_next) for c in cs} == brute_force_crosses_2d(m, n)
    assert len(Window.grid(m, n).faces()) == (m - 1) * (n - 1)


def test_two_by_two_window_has_no_crosses():
    assert crosses(Window.grid(2, 2)) == []


def test_three_dimensional_crosses():
    w = Window.box(3, 3, 3)
    cs = crosses(w)
    per_edge = {}
    for c in cs:
        per_edge.setdefault((c.v, c.v_next), []).append(c)
    # the edge through the centre of a 3x3x3 box has all four incident faces inside
    centre = per_edge[(Vertex(1, 1, 0), Vertex(1, 1, 1))]
    assert len(centre) == 6
    # two types: faces sharing a plane family or not
    same = [c for c in centre if c.f.plane == c.f_next.plane]
    assert len(same) == 2
    assert all(len(v) <= 6 for v in per_edge.values())


@given(st.integers(2, 6), st.integers(2, 6), st.integers(-3, 3), st.integers(-3, 3))
def test_cross_incidence(m, n, i0, j0):
    for c in crosses(Window.grid(m, n, (i0, j0))):
        assert incident(c.v, c.f) and incident(c.v, c.f_next)
        assert incident(c.v_next, c.f) and incident(c.v_next, c.f_next)


@given(st.integers(2, 3), st.integers(2, 3), st.integers(2, 3))
def test_cross_incidence_3d(a, b, c):
    for cr in crosses(Window.box(a, b, c)):
        assert incident(cr.v, cr.f) and incident(cr.v, cr.f_next)
        assert incident(cr.v_next, cr.f) and incident(cr.v_next, cr.f_next)


@given(st.integers(-5, 5), st.integers(-5, 5), st.booleans())
def test_dual_of_dual_edge(i, j, horizontal):
    v = Vertex(i, j)
    w = Vertex(i + 1, j) if horizontal else Vertex(i, j + 1)
    assert dual_vertices(*dual_faces(v, w)) == (v, w)


def test_dual_edge_convention():
    assert dual_faces(Vertex(1, 1), Vertex(2, 1)) == (Face(1, 0), Face(1, 1))
    assert dual_faces(Vertex(1, 1), Vertex(1, 2)) == (Face(0, 1), Face(1, 1))


def test_window_validation():
    with pytest.raises(ValueError):
        Window.grid(1, 4)
    with pytest.raises(ValueError):
        Face(0, 0, 0)
    assert len(vertex_edges(Window.grid(3, 3))) == 12

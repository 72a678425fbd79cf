"""Combinatorics of the double lattice D = V u F over finite windows.

Face(i, j) is the unit square [i, i+1] x [j, j+1].  In three dimensions a
face also carries its coordinate plane (12, 13 or 23) and is indexed by its
lower corner r, so the 12-face at r has corners r, r+e1, r+e1+e2, r+e2.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
from typing import NamedTuple

VERTEX = "V"
FACE = "F"
PLANES = (12, 13, 23)


class CellId(NamedTuple):
    kind: str
    coords: tuple
    plane: int | None = None

    def __repr__(self):
        tag = "Vertex" if self.kind == VERTEX else "Face"
        extra = f", plane={self.plane}" if self.plane is not None else ""
        return f"{tag}{tuple(self.coords)}{extra}"


def Vertex(*coords):
    return CellId(VERTEX, tuple(int(c) for c in coords))


def Face(*coords, plane=None):
    coords = tuple(int(c) for c in coords)
    if len(coords) == 3 and plane is None:
        raise ValueError("a face of Z^3 needs its coordinate plane")
    return CellId(FACE, coords, plane)


def cell_key(c):
    """Total order on cells: vertices first, then lexicographic coordinates."""
    return (0 if c.kind == VERTEX else 1, tuple(c.coords), c.plane or 0)


def _plane_axes(plane):
    return {12: (0, 1), 13: (0, 2), 23: (1, 2)}[plane]


class Cross(NamedTuple):
    """Two adjacent vertices and two adjacent faces, all mutually incident."""

    v: CellId
    f: CellId
    v_next: CellId
    f_next: CellId


class Incidence(NamedTuple):
    cells: list
    boundary: bool


@dataclass(frozen=True)
class Window:
    """Finite box of Z^2 or Z^3 given by inclusive vertex ranges per axis."""

    extents: tuple

    def __post_init__(self):
        ext = tuple((int(lo), int(hi)) for lo, hi in self.extents)
        if len(ext) not in (2, 3):
            raise ValueError("windows are 2- or 3-dimensional")
        if any(hi - lo < 1 for lo, hi in ext):
            raise ValueError(f"window {ext} needs at least two vertices per axis")
        object.__setattr__(self, "extents", ext)

    @classmethod
    def grid(cls, m, n, origin=(0, 0)):
        return cls(((origin[0], origin[0] + m - 1), (origin[1], origin[1] + n - 1)))

    @classmethod
    def box(cls, a, b, c, origin=(0, 0, 0)):
        return cls(tuple((o, o + s - 1) for o, s in zip(origin, (a, b, c))))

    @property
    def dims(self):
        return len(self.extents)

    @property
    def shape(self):
        return tuple(hi - lo + 1 for lo, hi in self.extents)

    @property
    def origin(self):
        return tuple(lo for lo, _ in self.extents)

    def has_vertex(self, coords):
        return all(lo <= c <= hi for c, (lo, hi) in zip(coords, self.extents))

    def contains(self, cell):
        if cell.kind == VERTEX:
            return len(cell.coords) == self.dims and self.has_vertex(cell.coords)
        return all(self.has_vertex(v.coords) for v in face_vertices(cell))

    def vertices(self):
        return [Vertex(*c) for c in product(*(range(lo, hi + 1) for lo, hi in self.extents))]

    def faces(self):
        if self.dims == 2:
            (i0, i1), (j0, j1) = self.extents
            return [Face(i, j) for i in range(i0, i1) for j in range(j0, j1)]
        out = []
        for plane in PLANES:
            a, b = _plane_axes(plane)
            ranges = [range(lo, hi + 1) for lo, hi in self.extents]
            ranges[a] = range(self.extents[a][0], self.extents[a][1])
            ranges[b] = range(self.extents[b][0], self.extents[b][1])
            out.extend(Face(*c, plane=plane) for c in product(*ranges))
        return out

    def cells(self):
        return self.vertices() + self.faces()


def _unit(dims, axis):
    e = [0] * dims
    e[axis] = 1
    return tuple(e)


def _add(a, b, s=1):
    return tuple(x + s * y for x, y in zip(a, b))


def face_vertices(f):
    """The four corners of a face, in cyclic order."""
    if f.kind != FACE:
        raise ValueError(f"{f} is not a face")
    r = f.coords
    if len(r) == 2:
        a, b = (1, 0), (0, 1)
    else:
        ia, ib = _plane_axes(f.plane)
        a, b = _unit(3, ia), _unit(3, ib)
    return [Vertex(*r), Vertex(*_add(r, a)), Vertex(*_add(_add(r, a), b)), Vertex(*_add(r, b))]


def vertex_faces(v, window=None):
    """Faces incident to a vertex: 4 in Z^2, 12 in Z^3 (4 per plane family).

    With a window, faces outside it are dropped and the boundary flag is set.
    """
    if v.kind != VERTEX:
        raise ValueError(f"{v} is not a vertex")
    r = v.coords
    if len(r) == 2:
        i, j = r
        faces = [Face(i - 1, j - 1), Face(i, j - 1), Face(i - 1, j), Face(i, j)]
    else:
        faces = []
        for plane in PLANES:
            ia, ib = _plane_axes(plane)
            a, b = _unit(3, ia), _unit(3, ib)
            for sa, sb in ((1, 1), (0, 1), (1, 0), (0, 0)):
                c = _add(_add(r, a, -sa), b, -sb)
                faces.append(Face(*c, plane=plane))
    if window is None:
        return Incidence(faces, False)
    kept = [f for f in faces if window.contains(f)]
    return Incidence(kept, len(kept) < len(faces))


def incident(d, e):
    """True iff one cell is a face and the other one of its corners."""
    if d.kind == e.kind:
        return False
    f, v = (d, e) if d.kind == FACE else (e, d)
    if len(f.coords) != len(v.coords):
        return False
    return v in face_vertices(f)


def dual_faces(v, w):
    """The two faces sharing the Z^2 vertex edge (v, w), lower face first."""
    (i, j), (k, l) = sorted([tuple(v.coords), tuple(w.coords)])
    if (k - i, l - j) == (1, 0):
        return Face(i, j - 1), Face(i, j)
    if (k - i, l - j) == (0, 1):
        return Face(i - 1, j), Face(i, j)
    raise ValueError(f"{v} and {w} are not adjacent")


def dual_vertices(f, g):
    """The two vertices shared by adjacent Z^2 faces, lower vertex first."""
    (i, j), (k, l) = sorted([tuple(f.coords), tuple(g.coords)])
    if (k - i, l - j) == (0, 1):
        return Vertex(i, j + 1), Vertex(i + 1, j + 1)
    if (k - i, l - j) == (1, 0):
        return Vertex(i + 1, j), Vertex(i + 1, j + 1)
    raise ValueError(f"{f} and {g} are not adjacent")


def edge_faces(v, w):
    """All faces of Z^3 containing the vertex edge (v, w)."""
    a, b = sorted([tuple(v.coords), tuple(w.coords)])
    diff = [y - x for x, y in zip(a, b)]
    if sorted(diff) != [0, 0, 1]:
        raise ValueError(f"{v} and {w} are not adjacent")
    axis = diff.index(1)
    out = []
    for other in range(3):
        if other == axis:
            continue
        plane = int("".join(str(k + 1) for k in sorted((axis, other))))
        out.append(Face(*_add(a, _unit(3, other), -1), plane=plane))
        out.append(Face(*a, plane=plane))
    return out


def vertex_edges(window):
    """All vertex edges (v, v + e_k) inside the window."""
    out = []
    for v in window.vertices():
        for k in range(window.dims):
            w = _add(v.coords, _unit(window.dims, k))
            if window.has_vertex(w):
                out.append((v, Vertex(*w)))
    return out


def crosses(window):
    """Every cross whose four cells lie inside the window.

    In Z^2 there is exactly one cross per vertex edge with both dual faces
    present.  In Z^3 every pair of faces containing an edge gives a cross,
    six per interior edge.
    """
    out = []
    for v, w in vertex_edges(window):
        if window.dims == 2:
            f, g = dual_faces(v, w)
            if window.contains(f) and window.contains(g):
                out.append(Cross(v, f, w, g))
        else:
            faces = sorted((f for f in edge_faces(v, w) if window.contains(f)), key=cell_key)
            out.extend(Cross(v, f, w, g) for f, g in combinations(faces, 2))
    return out


def adjacent_pairs(window, kind):
    """Lattice-neighbour pairs of vertices (kind V) or faces (kind F) in Z^2."""
    (i0, i1), (j0, j1) = window.extents
    if kind == VERTEX:
        cells = {(i, j) for i in range(i0, i1 + 1) for j in range(j0, j1 + 1)}
        make = Vertex
    else:
        cells = {(i, j) for i in range(i0, i1) for j in range(j0, j1)}
        make = Face
    out = []
    for i, j in sorted(cells):
        for di, dj in ((1, 0), (0, 1)):
            if (i + di, j + dj) in cells:
                out.append((make(i, j), make(i + di, j + dj)))
    return out

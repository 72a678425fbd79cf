"""Binets and bi*nets on Z^2 windows with their defining predicates.

A binet stores one array of points for the vertices and one for the faces.
Array index ``[i, j]`` corresponds to ``Vertex(i0 + i, j0 + j)`` or
``Face(i0 + i, j0 + j)`` where ``(i0, j0)`` is the window origin.  Cells whose
value is undetermined (for example the plane of a boundary vertex) hold NaN
and every check skips items that touch them.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .lattice import FACE, VERTEX, CellId, Cross, Face, Vertex, Window, cell_key
from .projective import RANK_TOL, inner, normalize, unit_rows


class RegularityError(ValueError):
    """Input violates a regularity assumption (coincident points, parallel planes...)."""


class NotConjugateError(ValueError):
    def __init__(self, message, worst=None, residual=None):
        super().__init__(message)
        self.worst = worst
        self.residual = residual


# ---------------------------------------------------------------------------
# containers


class CellMap:
    """Values on the vertices and faces of a Z^2 window."""

    def __init__(self, window, vertex, face):
        self.window = window
        self.vertex = np.asarray(vertex, dtype=float)
        self.face = np.asarray(face, dtype=float)
        m, n = window.shape
        if self.vertex.shape[:2] != (m, n) or self.face.shape[:2] != (m - 1, n - 1):
            raise ValueError(
                f"array shapes {self.vertex.shape[:2]} / {self.face.shape[:2]} do not fit window {window.shape}"
            )

    def _index(self, cell):
        i0, j0 = self.window.origin
        i, j = cell.coords
        return (i - i0, j - j0)

    def __getitem__(self, cell):
        arr = self.vertex if cell.kind == VERTEX else self.face
        i, j = self._index(cell)
        if i < 0 or j < 0:
            raise IndexError(f"{cell} outside window")
        return arr[i, j]

    def __setitem__(self, cell, value):
        arr = self.vertex if cell.kind == VERTEX else self.face
        arr[self._index(cell)] = value

    def cells(self):
        return self.window.cells()

    def defined(self, cell):
        return bool(np.all(np.isfinite(self[cell])))

    def copy(self):
        return type(self)(self.window, self.vertex.copy(), self.face.copy())

    def with_arrays(self, vertex, face):
        return type(self)(self.window, vertex, face)


class Binet(CellMap):
    """Map D -> points.  ``ambient`` is "E3" or the name of a quadric form."""

    def __init__(self, window, vertex, face, ambient="E3"):
        super().__init__(window, vertex, face)
        self.ambient = ambient

    def copy(self):
        return Binet(self.window, self.vertex.copy(), self.face.copy(), self.ambient)

    def with_arrays(self, vertex, face):
        return Binet(self.window, vertex, face, self.ambient)

    @property
    def homogeneous(self):
        return self.ambient != "E3"

    @classmethod
    def from_function(cls, window, fn):
        """Build a Euclidean binet from ``fn(kind, i, j) -> 3-vector``."""
        (i0, i1), (j0, j1) = window.extents
        vertex = np.array([[fn(VERTEX, i, j) for j in range(j0, j1 + 1)] for i in range(i0, i1 + 1)])
        face = np.array([[fn(FACE, i + 0.5, j + 0.5) for j in range(j0, j1)] for i in range(i0, i1)])
        return cls(window, vertex, face)


class BiStarNet(CellMap):
    """Map D -> planes {x : <u, x> + h = 0}; values stored as [u1, u2, u3, h] with |u| = 1."""

    @property
    def normals(self):
        return self.vertex[..., :3], self.face[..., :3]

    @property
    def offsets(self):
        return self.vertex[..., 3], self.face[..., 3]


def plane_from_equation(normal, offset):
    """Plane {x : <normal, x> + offset = 0} as a unit [u, h] 4-vector."""
    normal = np.asarray(normal, dtype=float)
    s = np.linalg.norm(normal)
    if s == 0:
        raise RegularityError("plane normal is zero")
    return np.append(normal / s, offset / s)


def grid_binet(m, n, spacing=1.0, origin=(0, 0)):
    """Flat integer grid b(i, j) = (i, j, 0) with faces at the square centres."""
    w = Window.grid(m, n, origin)
    return Binet.from_function(w, lambda kind, i, j: (spacing * i, spacing * j, 0.0))


# ---------------------------------------------------------------------------
# structural stacks (index arithmetic for the fixed Z^2 combinatorics)


def face_corner_stack(vertex):
    """Corner values of every face in cyclic order: shape (m-1, n-1, 4, ...)."""
    return np.stack([vertex[:-1, :-1], vertex[1:, :-1], vertex[1:, 1:], vertex[:-1, 1:]], axis=2)


def vertex_face_stack(face):
    """Values of the four faces around every interior vertex: (m-2, n-2, 4, ...)."""
    return np.stack([face[:-1, :-1], face[1:, :-1], face[1:, 1:], face[:-1, 1:]], axis=2)


def cross_stacks(cm):
    """Arrays (v, f, v', f') for the horizontal and the vertical vertex edges.

    Horizontal edge ((i, j), (i+1, j)) pairs with faces (i, j-1), (i, j);
    vertical edge ((i, j), (i, j+1)) pairs with faces (i-1, j), (i, j).
    """
    V, F = cm.vertex, cm.face
    horizontal = (V[:-1, 1:-1], F[:, :-1], V[1:, 1:-1], F[:, 1:])
    vertical = (V[1:-1, :-1], F[:-1, :], V[1:-1, 1:], F[1:, :])
    return horizontal, vertical


def cross_labels(window):
    """Cross objects aligned with the flattened horizontal and vertical stacks."""
    m, n = window.shape
    i0, j0 = window.origin
    horizontal = [
        Cross(Vertex(i0 + i, j0 + j + 1), Face(i0 + i, j0 + j), Vertex(i0 + i + 1, j0 + j + 1), Face(i0 + i, j0 + j + 1))
        for i in range(m - 1)
        for j in range(n - 2)
    ]
    vertical = [
        Cross(Vertex(i0 + i + 1, j0 + j), Face(i0 + i, j0 + j), Vertex(i0 + i + 1, j0 + j + 1), Face(i0 + i + 1, j0 + j))
        for i in range(m - 2)
        for j in range(n - 1)
    ]
    return horizontal, vertical


def face_labels(window):
    m, n = window.shape
    i0, j0 = window.origin
    return [Face(i0 + i, j0 + j) for i in range(m - 1) for j in range(n - 1)]


def interior_vertex_labels(window):
    m, n = window.shape
    i0, j0 = window.origin
    return [Vertex(i0 + i + 1, j0 + j + 1) for i in range(m - 2) for j in range(n - 2)]


def incident_pair_stacks(cm):
    """All incident (vertex, face) value pairs: arrays of shape (4, m-1, n-1, ...)."""
    corners = face_corner_stack(cm.vertex)
    faces = np.broadcast_to(cm.face[:, :, None], corners.shape)
    return np.moveaxis(corners, 2, 0), np.moveaxis(faces, 2, 0)


def incident_pair_labels(window):
    m, n = window.shape
    i0, j0 = window.origin
    out = []
    for di, dj in ((0, 0), (1, 0), (1, 1), (0, 1)):
        for i in range(m - 1):
            for j in range(n - 1):
                out.append((Vertex(i0 + i + di, j0 + j + dj), Face(i0 + i, j0 + j)))
    return out


@lru_cache(maxsize=64)
def _incidence_adjacency(m, n):
    """Adjacency lists of the vertex-face incidence graph, cells flattened."""
    nv = m * n
    adj = [[] for _ in range(nv + (m - 1) * (n - 1))]
    for i in range(m - 1):
        for j in range(n - 1):
            f = nv + i * (n - 1) + j
            for di, dj in ((0, 0), (1, 0), (1, 1), (0, 1)):
                v = (i + di) * n + (j + dj)
                adj[f].append(v)
                adj[v].append(f)
    return tuple(tuple(sorted(a)) for a in adj)


def flat_cell(window, cell):
    m, n = window.shape
    i0, j0 = window.origin
    i, j = cell.coords[0] - i0, cell.coords[1] - j0
    return i * n + j if cell.kind == VERTEX else m * n + i * (n - 1) + j


def unflat_cell(window, k):
    m, n = window.shape
    i0, j0 = window.origin
    if k < m * n:
        return Vertex(i0 + k // n, j0 + k % n)
    k -= m * n
    return Face(i0 + k // (n - 1), j0 + k % (n - 1))


def spanning_tree(window, defined, root=None):
    """Breadth-first tree of the incidence graph restricted to defined cells.

    ``defined`` is a flat boolean mask.  The root is the smallest defined
    cell unless given.  Returns (root, [(child, parent), ...]) as flat indices.
    """
    m, n = window.shape
    adj = _incidence_adjacency(m, n)
    if root is None:
        cands = [k for k in range(len(adj)) if defined[k]]
        if not cands:
            raise RegularityError("no defined cells")
        root = min(cands, key=lambda k: cell_key(unflat_cell(window, k)))
    seen = np.zeros(len(adj), dtype=bool)
    seen[root] = True
    order = []
    queue = deque([root])
    while queue:
        a = queue.popleft()
        for b in adj[a]:
            if defined[b] and not seen[b]:
                seen[b] = True
                order.append((b, a))
                queue.append(b)
    return root, order


def flat_values(cm):
    """Stack vertex and face values in flattened cell order."""
    tail = cm.vertex.shape[2:]
    return np.concatenate([cm.vertex.reshape((-1,) + tail), cm.face.reshape((-1,) + tail)])


def unflat_values(window, values):
    m, n = window.shape
    tail = values.shape[1:]
    return values[: m * n].reshape((m, n) + tail), values[m * n :].reshape((m - 1, n - 1) + tail)


# ---------------------------------------------------------------------------
# reports


@dataclass
class CheckReport:
    """Outcome of a residual check.  ``passed`` iff max_residual <= tol.

    Degenerate items count as an infinite residual.  ``count`` is the number
    of evaluated items; items touching undefined cells are skipped.
    """

    name: str
    max_residual: float
    worst: object
    tol: float
    count: int
    mean_residual: float = 0.0
    degenerate: list = field(default_factory=list)
    residuals: dict = field(default_factory=dict, repr=False)

    @property
    def passed(self):
        return self.max_residual <= self.tol

    def summary(self):
        return {
            "check": self.name,
            "passed": bool(self.passed),
            "max_residual": None if not np.isfinite(self.max_residual) else float(self.max_residual),
            "mean_residual": float(self.mean_residual),
            "worst": repr(self.worst) if self.worst is not None else None,
            "count": int(self.count),
            "degenerate": [repr(d) for d in self.degenerate],
            "tol": float(self.tol),
        }


def make_report(name, values, labels, tol, degenerate=None, keep=True):
    values = np.asarray(values, dtype=float).ravel()
    degenerate = np.zeros(values.shape, dtype=bool) if degenerate is None else np.asarray(degenerate).ravel()
    ok = np.isfinite(values) | degenerate
    count = int(np.sum(ok))
    bad = [labels[k] for k in np.flatnonzero(degenerate & ok)]
    vals = np.where(degenerate, np.inf, values)
    if count == 0:
        return CheckReport(name, 0.0, None, tol, 0)
    masked = np.where(ok, vals, -np.inf)
    k = int(np.argmax(masked))
    finite = vals[ok & np.isfinite(vals)]
    mean = float(finite.mean()) if finite.size else 0.0
    res = {labels[i]: float(vals[i]) for i in np.flatnonzero(ok)} if keep else {}
    return CheckReport(name, float(masked[k]), labels[k], tol, count, mean, bad, res)


@dataclass
class PrincipalReport:
    conjugate: CheckReport
    orthogonal: CheckReport

    @property
    def passed(self):
        return self.conjugate.passed and self.orthogonal.passed

    @property
    def max_residual(self):
        return max(self.conjugate.max_residual, self.orthogonal.max_residual)

    def summary(self):
        return {"passed": bool(self.passed), "conjugate": self.conjugate.summary(), "orthogonal": self.orthogonal.summary()}


# ---------------------------------------------------------------------------
# residual kernels


def _finite_rows(stack):
    flat = stack.reshape((-1,) + stack.shape[-2:])
    return flat, np.all(np.isfinite(flat), axis=(1, 2))


def planarity_residuals(points, homogeneous=False):
    """Coplanarity residual of point groups, shape (..., p, k) -> (...).

    Euclidean points: smallest over largest singular value of the centred
    group.  Homogeneous points: fourth over first singular value of the unit
    coordinate rows (a plane of RP^n has rank 3).  Also returns a mask of
    groups that do not even span a line's worth (collinear/coincident).
    """
    points = np.asarray(points, dtype=float)
    batch = points.shape[:-2]
    flat, ok = _finite_rows(points)
    res = np.full(flat.shape[0], np.nan)
    degen = np.zeros(flat.shape[0], dtype=bool)
    if np.any(ok):
        grp = flat[ok]
        if homogeneous:
            d = unit_rows(grp)
            s = np.linalg.svd(d, compute_uv=False)
            if s.shape[-1] < 4:
                r = np.zeros(grp.shape[0])
            else:
                r = s[:, 3] / s[:, 0]
            dg = s[:, 2] / s[:, 0] < RANK_TOL
        else:
            d = grp - grp.mean(axis=1, keepdims=True)
            s = np.linalg.svd(d, compute_uv=False)
            top = np.where(s[:, 0] > 0, s[:, 0], 1.0)
            r = np.zeros(grp.shape[0]) if s.shape[-1] < 3 else s[:, 2] / top
            dg = s[:, 1] / top < RANK_TOL
        res[ok] = r
        degen[ok] = dg
    return res.reshape(batch), degen.reshape(batch)


def fit_planes(points):
    """Total-least-squares planes [u, h] through point groups (..., p, 3)."""
    points = np.asarray(points, dtype=float)
    batch = points.shape[:-2]
    flat, ok = _finite_rows(points)
    out = np.full((flat.shape[0], 4), np.nan)
    if np.any(ok):
        grp = flat[ok]
        c = grp.mean(axis=1)
        _, _, vt = np.linalg.svd(grp - c[:, None, :])
        u = vt[:, -1, :]
        out[ok] = np.concatenate([u, -np.sum(u * c, axis=1)[:, None]], axis=1)
    return out.reshape(batch + (4,))


# ---------------------------------------------------------------------------
# checks


def check_conjugate(b, tol=1e-9):
    """Planarity of every vertex quad and of the four faces around each interior vertex."""
    vq, vdeg = planarity_residuals(face_corner_stack(b.vertex), b.homogeneous)
    fq, fdeg = planarity_residuals(vertex_face_stack(b.face), b.homogeneous)
    labels = face_labels(b.window) + interior_vertex_labels(b.window)
    return make_report(
        "conjugate",
        np.concatenate([vq.ravel(), fq.ravel()]),
        labels,
        tol,
        np.concatenate([vdeg.ravel(), fdeg.ravel()]),
    )


def _edge_dot_residual(v, f, w, g):
    dv = w - v
    df = g - f
    nv = np.linalg.norm(dv, axis=-1)
    nf = np.linalg.norm(df, axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.abs(np.sum(dv * df, axis=-1)) / (nv * nf), nv, nf


def check_orthogonal(b, tol=1e-9):
    """Per cross |<dv, df>| / (|dv| |df|)."""
    if b.homogeneous:
        raise ValueError("orthogonality is a Euclidean notion")
    (h, v) = cross_stacks(b)
    rh, nvh, nfh = _edge_dot_residual(*h)
    rv, nvv, nfv = _edge_dot_residual(*v)
    lengths = np.concatenate([nvh.ravel(), nfh.ravel(), nvv.ravel(), nfv.ravel()])
    if np.any(lengths[np.isfinite(lengths)] == 0):
        raise RegularityError("a cross has a zero-length edge")
    lh, lv = cross_labels(b.window)
    return make_report("orthogonal", np.concatenate([rh.ravel(), rv.ravel()]), lh + lv, tol)


def check_principal(b, tol=1e-9):
    return PrincipalReport(check_conjugate(b, tol), check_orthogonal(b, tol))


def check_bistar_orthogonal(bs, tol=1e-9):
    """Per cross, the vertex-plane intersection line is orthogonal to the face-plane one."""
    (h, v) = cross_stacks(bs)
    vals = []
    for uv, uf, uw, ug in (h, v):
        dv = np.cross(uv[..., :3], uw[..., :3])
        df = np.cross(uf[..., :3], ug[..., :3])
        nv = np.linalg.norm(dv, axis=-1)
        nf = np.linalg.norm(df, axis=-1)
        small = np.concatenate([nv[np.isfinite(nv)], nf[np.isfinite(nf)]])
        if np.any(small < 1e-14):
            raise RegularityError("incident planes of a cross are parallel")
        with np.errstate(invalid="ignore", divide="ignore"):
            vals.append((np.abs(np.sum(dv * df, axis=-1)) / (nv * nf)).ravel())
    lh, lv = cross_labels(bs.window)
    return make_report("bistar_orthogonal", np.concatenate(vals), lh + lv, tol)


def check_polar_binet(b, form, tol=1e-9):
    """|<x_d, x_d'>| on unit-normalised coordinates for every incident pair."""
    xv, xf = incident_pair_stacks(b)
    if xv.shape[-1] != form.size:
        raise ValueError(f"binet coordinates have length {xv.shape[-1]}, {form.name} needs {form.size}")
    with np.errstate(invalid="ignore"):
        vals = np.abs(inner(form, unit_rows(xv), unit_rows(xf)))
    return make_report("polar", vals.ravel(), incident_pair_labels(b.window), tol)


# ---------------------------------------------------------------------------
# box operators


def orient_coherently(bs):
    """Flip plane normals so incident normals point the same way.

    Breadth-first from the smallest defined cell, whose normal gets a positive
    leading coordinate; every other plane is flipped to have a nonnegative
    inner product with its tree parent.
    """
    w = bs.window
    vals = flat_values(bs).copy()
    defined = np.all(np.isfinite(vals), axis=1)
    root, order = spanning_tree(w, defined)
    lead = normalize(vals[root, :3])
    if np.dot(lead, vals[root, :3]) < 0:
        vals[root] *= -1
    for child, parent in order:
        if np.dot(vals[child, :3], vals[parent, :3]) < 0:
            vals[child] *= -1
    return BiStarNet(w, *unflat_values(w, vals))


def box_planes(b, tol=1e-9):
    """Plane through the incident points of every cell.

    Face planes come from the four corners, vertex planes from the four faces
    around interior vertices; boundary vertices get NaN.  Refuses input whose
    conjugacy residual exceeds ``tol``.
    """
    if b.homogeneous:
        raise ValueError("box_planes works on Euclidean binets")
    rep = check_conjugate(b, tol)
    if not rep.passed:
        raise NotConjugateError(f"binet is not conjugate (residual {rep.max_residual:.3g} at {rep.worst})", rep.worst, rep.max_residual)
    m, n = b.window.shape
    face_planes = fit_planes(face_corner_stack(b.vertex))
    vertex_planes = np.full((m, n, 4), np.nan)
    vertex_planes[1:-1, 1:-1] = fit_planes(vertex_face_stack(b.face))
    return orient_coherently(BiStarNet(b.window, vertex_planes, face_planes))


def _intersect_planes(planes, tol):
    """Least-squares common point of plane groups (..., p, 4) with p >= 3 defined."""
    batch = planes.shape[:-2]
    flat = planes.reshape((-1,) + planes.shape[-2:])
    pts = np.full((flat.shape[0], 3), np.nan)
    res = np.full(flat.shape[0], np.nan)
    for k, grp in enumerate(flat):
        grp = grp[np.all(np.isfinite(grp), axis=1)]
        if grp.shape[0] < 3:
            continue
        x, *_ = np.linalg.lstsq(grp[:, :3], -grp[:, 3], rcond=None)
        if grp.shape[0] > 3:
            s = np.linalg.svd(unit_rows(grp), compute_uv=False)
            res[k] = s[3] / s[0]
        else:
            res[k] = 0.0
        pts[k] = x
    return pts.reshape(batch + (3,)), res.reshape(batch)


def box_star_points(bs, tol=1e-9):
    """Common point of the planes incident to every cell.

    A cell needs at least three defined incident planes; otherwise it stays
    NaN.  Concurrency is measured as the fourth over the first singular value
    of the unit plane coordinates and gated by ``tol``.
    """
    m, n = bs.window.shape
    fpts, fres = _intersect_planes(face_corner_stack(bs.vertex), tol)
    vpts = np.full((m, n, 3), np.nan)
    vres = np.full((m, n), np.nan)
    vpts[1:-1, 1:-1], vres[1:-1, 1:-1] = _intersect_planes(vertex_face_stack(bs.face), tol)
    # boundary vertices: only two incident faces, not enough planes
    rep = make_report(
        "concurrent",
        np.concatenate([fres.ravel(), vres[1:-1, 1:-1].ravel()]),
        face_labels(bs.window) + interior_vertex_labels(bs.window),
        tol,
    )
    if not rep.passed:
        raise NotConjugateError(f"planes are not concurrent (residual {rep.max_residual:.3g} at {rep.worst})", rep.worst, rep.max_residual)
    return Binet(bs.window, vpts, fpts)


# ---------------------------------------------------------------------------
# transformations of Euclidean binets


def apply_projective(b, matrix):
    """Apply a 4x4 projective map of RP^3 to a Euclidean binet."""
    matrix = np.asarray(matrix, dtype=float)

    def go(x):
        h = np.concatenate([x, np.ones(x.shape[:-1] + (1,))], axis=-1) @ matrix.T
        return h[..., :3] / h[..., 3:]

    return b.with_arrays(go(b.vertex), go(b.face))


def apply_similarity(b, rotation, scale=1.0, shift=(0.0, 0.0, 0.0)):
    rotation = np.asarray(rotation, dtype=float)

    def go(x):
        return scale * x @ rotation.T + np.asarray(shift)

    return b.with_arrays(go(b.vertex), go(b.face))


def max_point_discrepancy(a, b):
    """Largest distance between corresponding defined points of two cell maps."""
    d = np.concatenate([(a.vertex - b.vertex).reshape(-1, a.vertex.shape[-1]), (a.face - b.face).reshape(-1, a.face.shape[-1])])
    d = np.linalg.norm(d, axis=1)
    d = d[np.isfinite(d)]
    return float(d.max()) if d.size else 0.0

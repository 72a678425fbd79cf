"""Normal lines, focal binets, cell circles and cones, and curvature spheres.

Curvature spheres are computed twice: from the polar point of the span of
the six lift points around an edge (Moebius route) and from the meeting
point of two adjacent Lie lines (Lie route).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .binet import Binet, box_planes, check_conjugate, check_principal, make_report
from .lattice import VERTEX, Face, Vertex, Window, face_vertices, vertex_faces
from .lifts import EuclideanLine, PointAtInfinityError, adjacent_labels, sphere_from_lift
from .projective import MOEBIUS, smallest_right_vector, unit_rows


class NotPrincipalError(ValueError):
    pass


# ---------------------------------------------------------------------------
# normal lines


@dataclass
class NormalBicongruence:
    """Normal lines per cell plus the pairwise meeting data of neighbouring lines."""

    points: Binet
    directions: Binet
    report: object
    meets: dict
    parallel: list

    def line(self, cell):
        return EuclideanLine(self.points[cell], self.directions[cell])


def _closest_points(p1, d1, p2, d2):
    """Midpoint of the common perpendicular of two lines and the skewness residual."""
    cross = np.cross(d1, d2)
    nc = np.linalg.norm(cross)
    w = p2 - p1
    nw = np.linalg.norm(w)
    if nc < 1e-12:
        return None, 0.0
    skew = abs(w @ cross) / (nc * nw) if nw > 0 else 0.0
    a = np.array([[d1 @ d1, -(d1 @ d2)], [d1 @ d2, -(d2 @ d2)]])
    s, t = np.linalg.solve(a, np.array([w @ d1, w @ d2]))
    return 0.5 * (p1 + s * d1 + p2 + t * d2), float(skew)


def normal_bicongruence(b, tol=1e-9):
    """Lines through b(d) perpendicular to the plane of the incident points.

    Neighbouring lines of the same kind are tested for intersection through
    the normalised triple product of their directions and the connecting
    vector.  Parallel neighbours meet at infinity and are listed separately.
    """
    planes = box_planes(b, tol=np.inf)
    w = b.window
    dirs = Binet(w, planes.vertex[..., :3], planes.face[..., :3])
    meets, parallel, vals, labels = {}, [], [], []
    for d, e in adjacent_labels(w):
        p1, d1, p2, d2 = b[d], dirs[d], b[e], dirs[e]
        labels.append((d, e))
        if not (np.all(np.isfinite(d1)) and np.all(np.isfinite(d2))):
            vals.append(np.nan)
            continue
        point, skew = _closest_points(p1, d1, p2, d2)
        vals.append(skew)
        if point is None:
            parallel.append((d, e))
        else:
            meets[(d, e)] = point
    report = make_report("normal_lines_meet", np.array(vals), labels, tol)
    return NormalBicongruence(b, dirs, report, meets, parallel)


# ---------------------------------------------------------------------------
# focal binets


def focal_binet(b, direction=1, tol=1e-9):
    """Binet of meeting points of neighbouring normal lines along one lattice direction.

    Direction 1: new vertex (i, j) from the vertex edge (i, j)-(i+1, j) and
    new face (i, j) from the face edge (i, j)-(i+1, j); direction 2 is the
    same along the second index.  Parallel or undefined lines give NaN.
    """
    nb = normal_bicongruence(b, tol)
    m, n = b.window.shape
    i0, j0 = b.window.origin
    di, dj = (1, 0) if direction == 1 else (0, 1)
    vshape = (m - di, n - dj)
    fshape = (m - 1 - di, n - 1 - dj)
    vert = np.full(vshape + (3,), np.nan)
    face = np.full(fshape + (3,), np.nan)
    for arr, make, shape in ((vert, Vertex, vshape), (face, Face, fshape)):
        for i in range(shape[0]):
            for j in range(shape[1]):
                key = (make(i0 + i, j0 + j), make(i0 + i + di, j0 + j + dj))
                if key in nb.meets:
                    arr[i, j] = nb.meets[key]
    win = Window.grid(vshape[0], vshape[1], b.window.origin)
    return Binet(win, vert, face)


# ---------------------------------------------------------------------------
# circles and cones


@dataclass(frozen=True)
class CellCircle:
    center: np.ndarray
    r_squared: float
    plane_normal: np.ndarray


@dataclass(frozen=True)
class CellCone:
    apex: np.ndarray
    axis: np.ndarray
    cos_half_angle: float

    @property
    def real(self):
        return abs(self.cos_half_angle) <= 1.0


def cell_circle(b, lift, cell, planes=None):
    """Section of the cell's decoded sphere with the plane of its incident points."""
    planes = box_planes(b) if planes is None else planes
    pl = planes[cell]
    if not np.all(np.isfinite(pl)):
        raise ValueError(f"{cell} has no plane (boundary cell)")
    sph = sphere_from_lift(lift.points[cell])
    u, h = pl[:3], pl[3]
    dist = u @ sph.center + h
    return CellCircle(sph.center - dist * u, sph.r_squared - dist * dist, u)


def cell_cone(b, llift, cell):
    """Oriented cone with apex b(d), axis the normal line and cosine sigma(d)."""
    pl = llift.base[cell]
    if not np.all(np.isfinite(pl)):
        raise ValueError(f"{cell} has no plane (boundary cell)")
    return CellCone(np.asarray(b[cell], dtype=float), pl[:3], float(llift.sigma[cell]))


# ---------------------------------------------------------------------------
# curvature spheres


@dataclass(frozen=True)
class CurvatureSphere:
    edge: tuple
    center: np.ndarray
    r_squared: float
    point: np.ndarray
    flat: bool = False
    degeneracy: float = 0.0

    @property
    def radius(self):
        return float(np.sqrt(abs(self.r_squared)))


def _edge_support(edge, window):
    """Cells whose lift points span the 3-space of an edge: incident cells of both ends."""
    d, e = edge
    if d.kind != e.kind:
        raise ValueError("curvature spheres live on edges between cells of one kind")
    if d.kind == VERTEX:
        parts = [vertex_faces(c, window) for c in (d, e)]
        if any(p.boundary for p in parts):
            raise ValueError(f"edge {edge} touches the boundary; its spheres are undefined")
        cells = parts[0].cells + parts[1].cells
    else:
        cells = face_vertices(d) + face_vertices(e)
    out = []
    for c in cells:
        if c not in out:
            out.append(c)
    return out


def _decode(point, edge, degeneracy):
    try:
        sph = sphere_from_lift(point)
    except PointAtInfinityError:
        return CurvatureSphere(edge, np.full(3, np.nan), np.inf, point, True, degeneracy)
    return CurvatureSphere(edge, sph.center, sph.r_squared, point, False, degeneracy)


def curvature_sphere(b, lift, edge, tol=1e-9):
    """Sphere polar to the span of the six lift points around an edge."""
    support = _edge_support(edge, b.window)
    rows = unit_rows(np.array([lift.points[c] for c in support]))
    null, smin, snext = smallest_right_vector(rows)
    if snext < tol:
        raise ValueError(f"lift points around {edge} span less than a 3-space (flat or umbilic edge)")
    return _decode(MOEBIUS.gram @ null, edge, smin)


def lie_curvature_point(lines, edge, tol=1e-9):
    """Meeting point of the Lie lines of two neighbouring cells and its decoded spheres.

    Returns the sphere (decoded from the first five coordinates), the
    oriented radius x6 / (x5 - x4), and the skewness residual of the lines.
    """
    a, b = lines[edge[0]], lines[edge[1]]
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValueError(f"edge {edge} touches an undefined line")
    a, b = unit_rows(a), unit_rows(b)
    mat = np.stack([a[0], a[1], -b[0], -b[1]], axis=1)
    coef, skew, _ = smallest_right_vector(mat)
    if skew > tol:
        raise ValueError(f"lines of {edge} are skew (residual {skew:.3g})")
    point = coef[0] * a[0] + coef[1] * a[1]
    sph = _decode(point[:5], edge, skew)
    w = point[4] - point[3]
    oriented = point[5] / w if abs(w) > 1e-14 * np.linalg.norm(point) else np.inf
    return sph, oriented, point


def same_kind_edges(window, kind=None, interior_only=True):
    """Neighbour pairs of one kind, dropping vertex edges that touch the boundary."""
    out = []
    for d, e in adjacent_labels(window):
        if kind is not None and d.kind != kind:
            continue
        if interior_only and d.kind == VERTEX and (
            vertex_faces(d, window).boundary or vertex_faces(e, window).boundary
        ):
            continue
        out.append((d, e))
    return out


def edge_direction(edge):
    d, e = edge
    return 1 if e.coords[0] != d.coords[0] else 2


def curvature_table(b, lift, lie=None, tol=1e-9):
    """Rows (edge, centre, r^2, flat) for all interior edges; Lie values added when given."""
    rows = []
    for edge in same_kind_edges(b.window):
        try:
            s = curvature_sphere(b, lift, edge, tol)
        except ValueError:
            rows.append({"edge": edge, "degenerate": True})
            continue
        row = {"edge": edge, "center": s.center, "r_squared": s.r_squared, "flat": s.flat, "degenerate": False}
        if lie is not None:
            ls, oriented, _ = lie_curvature_point(lie, edge, tol=np.inf)
            row.update(lie_center=ls.center, lie_r_squared=ls.r_squared, oriented_radius=oriented)
        rows.append(row)
    return rows


def require_principal(b, tol=1e-9):
    rep = check_principal(b, tol)
    if not rep.passed:
        raise NotPrincipalError(f"binet is not principal (max residual {rep.max_residual:.3g})")
    return rep


def focal_conjugacy(b, direction=1, tol=1e-8):
    return check_conjugate(focal_binet(b, direction), tol)

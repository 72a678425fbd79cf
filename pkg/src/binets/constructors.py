"""Generators and propagators for conjugate, orthogonal and principal binets.

Cauchy data for propagation are a conjugate net on the faces and the
vertex values on two axis lines through a centre vertex.  Every other
vertex is found quad by quad, outward from the axes in all four quadrants.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .binet import BiStarNet, Binet, RegularityError, _intersect_planes, face_corner_stack
from .lattice import Window


class DegenerateDataError(ValueError):
    def __init__(self, message, where=None):
        super().__init__(message)
        self.where = where


@dataclass
class CauchyData:
    """Face net (m-1, n-1, 3) plus vertex values on row ``center[0]`` and column ``center[1]``.

    ``vertex`` has shape (m, n, 3) with NaN off the axes.  ``center`` is in
    array indices.
    """

    window: Window
    face: np.ndarray
    vertex: np.ndarray
    center: tuple = (0, 0)

    def __post_init__(self):
        m, n = self.window.shape
        self.face = np.asarray(self.face, dtype=float)
        self.vertex = np.asarray(self.vertex, dtype=float)
        if self.face.shape != (m - 1, n - 1, 3) or self.vertex.shape != (m, n, 3):
            raise ValueError("Cauchy data arrays do not fit the window")
        ci, cj = self.center
        if not (np.all(np.isfinite(self.vertex[:, cj])) and np.all(np.isfinite(self.vertex[ci, :]))):
            raise ValueError("axis values must be finite")
        if not np.all(np.isfinite(self.face)):
            raise ValueError("face net must be finite")


@dataclass(frozen=True)
class ProfileCurve:
    """Meridian samples (radius, height) rotated by multiples of ``angular_step``."""

    radii: tuple
    heights: tuple
    angular_step: float
    count: int

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        z = np.asarray(self.heights, dtype=float)
        if r.shape != z.shape or r.size < 2:
            raise ValueError("profile needs matching radius/height samples, at least two")
        if np.any(r <= 0):
            raise ValueError("profile radii must be positive")
        if np.any(np.hypot(np.diff(r), np.diff(z)) == 0):
            raise ValueError("consecutive profile samples coincide")


# ---------------------------------------------------------------------------
# profiles


def cylinder_profile(m=8, n=6, step=np.pi / 8, height=0.4):
    return ProfileCurve(tuple([1.0] * n), tuple(height * np.arange(n)), step, m)


def sphere_profile(m=8, n=6, step=np.pi / 8, t0=0.5, dt=0.3):
    t = t0 + dt * np.arange(n)
    return ProfileCurve(tuple(np.sin(t)), tuple(np.cos(t)), step, m)


def cone_profile(m=8, n=6, step=np.pi / 8, t0=0.5, dt=0.3):
    t = t0 + dt * np.arange(n)
    return ProfileCurve(tuple(t), tuple(t), step, m)


def torus_profile(m=8, n=6, step=np.pi / 8, big=2.0, small=0.7, t0=-0.9, dt=0.35):
    t = t0 + dt * np.arange(n)
    return ProfileCurve(tuple(big + small * np.cos(t)), tuple(small * np.sin(t)), step, m)


PROFILES = {"cylinder": cylinder_profile, "sphere": sphere_profile, "cone": cone_profile, "torus": torus_profile}


def generate_revolution_circular(profile):
    """Circular net b(i, j) = (r_j cos(i theta), r_j sin(i theta), z_j), shape (count, samples, 3)."""
    r = np.asarray(profile.radii)
    z = np.asarray(profile.heights)
    ang = profile.angular_step * np.arange(profile.count)
    return np.stack(
        [np.outer(np.cos(ang), r), np.outer(np.sin(ang), r), np.broadcast_to(z, (profile.count, r.size))], axis=-1
    )


def revolution_binet(profile, face_profile=None):
    """Principal binet of a surface of revolution.

    Faces sit at angle (i + 1/2) theta on a second meridian; with
    ``face_profile`` None the face meridian is the chord midpoints pushed
    out so that the binet stays close to the surface.  Principal for any
    face meridian by mirror symmetry.
    """
    g = generate_revolution_circular(profile)
    r = np.asarray(profile.radii)
    z = np.asarray(profile.heights)
    if face_profile is None:
        fr = 0.5 * (r[:-1] + r[1:]) / np.cos(profile.angular_step / 2)
        fz = 0.5 * (z[:-1] + z[1:])
    else:
        fr, fz = (np.asarray(a, dtype=float) for a in face_profile)
    ang = profile.angular_step * (np.arange(profile.count - 1) + 0.5)
    f = np.stack([np.outer(np.cos(ang), fr), np.outer(np.sin(ang), fr), np.broadcast_to(fz, (ang.size, fr.size))], axis=-1)
    return Binet(Window.grid(profile.count, r.size), g, f)


# ---------------------------------------------------------------------------
# circles


@dataclass(frozen=True)
class CircleFit:
    center: np.ndarray
    radius: float
    axis: np.ndarray
    residual: float


def circumcircle(quad, tol=1e-9):
    """Circle through four points; residual is the 4th point's radial misfit over the radius."""
    p = np.asarray(quad, dtype=float)
    a, b, c = p[0], p[1], p[2]
    n = np.cross(b - a, c - a)
    nn = np.linalg.norm(n)
    if nn <= 1e-14 * max(np.linalg.norm(b - a), np.linalg.norm(c - a)) ** 2:
        raise RegularityError("points are collinear")
    # centre in the plane, equidistant from a, b, c
    lhs = np.array([b - a, c - a, n])
    rhs = np.array([0.5 * (b @ b - a @ a), 0.5 * (c @ c - a @ a), n @ a])
    center = np.linalg.solve(lhs, rhs)
    radius = float(np.linalg.norm(a - center))
    off_plane = abs((p[3] - a) @ n) / nn
    off_circle = abs(np.linalg.norm(p[3] - center) - radius)
    res = float(max(off_plane, off_circle) / radius)
    if res > tol:
        raise RegularityError(f"points are not concyclic (residual {res:.3g})")
    return CircleFit(center, radius, n / nn, res)


def circularity_residuals(g):
    """Concyclicity residual of every vertex quad of a V-net (m, n, 3)."""
    quads = face_corner_stack(g)
    out = np.zeros(quads.shape[:2])
    for idx in np.ndindex(out.shape):
        out[idx] = circumcircle(quads[idx], tol=np.inf).residual
    return out


# ---------------------------------------------------------------------------
# reflection construction


def _reflect_plane(plane, normal, through):
    """Reflect the oriented plane [u, h] in the mirror {<normal, x - through> = 0}."""
    u, h = plane[:3], plane[3]
    k = u @ normal
    return np.append(u - 2 * k * normal, h + 2 * k * (through @ normal))


def _reflect_point(x, normal, offset):
    """Reflect x in the mirror {<normal, x> + offset = 0} (unit normal)."""
    return x - 2 * (x @ normal + offset) * normal


def _mirror_matrix(normal, offset):
    m = np.eye(4)
    m[:3, :3] -= 2 * np.outer(normal, normal)
    m[:3, 3] = -2 * offset * normal
    return m


def _edge_mirror_from_points(a, b):
    d = b - a
    n = d / np.linalg.norm(d)
    return n, -n @ (0.5 * (a + b))


def _edge_mirror_from_planes(p, q, tol=1e-12):
    du = p[:3] - q[:3]
    s = np.linalg.norm(du)
    if s < tol:
        raise RegularityError("adjacent planes are parallel; bisector mirror undefined")
    return du / s, (p[3] - q[3]) / s


def _tree_edges(m, n):
    """Row 0 first, then every column upward: a spanning tree of the grid."""
    edges = [((i - 1, 0), (i, 0)) for i in range(1, m)]
    edges += [((i, j - 1), (i, j)) for i in range(m) for j in range(1, n)]
    return edges


def _closure(mirror_of_edge, m, n):
    """Max-abs deviation from identity of the four mirrors around each face."""
    worst = 0.0
    for i in range(m - 1):
        for j in range(n - 1):
            loop = [((i, j), (i + 1, j)), ((i + 1, j), (i + 1, j + 1)), ((i, j + 1), (i + 1, j + 1)), ((i, j), (i, j + 1))]
            t = np.eye(4)
            for e in loop:
                t = _mirror_matrix(*mirror_of_edge(*e)) @ t
            worst = max(worst, float(np.max(np.abs(t - np.eye(4)))))
    return worst


@dataclass
class ReflectionResult:
    values: np.ndarray
    closure: float
    degenerate: bool = False
    diagnostics: dict = field(default_factory=dict)


def reflection_conical_from_circular(g, h0, tol=1e-9):
    """Planes on V obtained by reflecting ``h0`` (through g(0,0)) in the edge bisector planes.

    The bisector plane of g(v) g(v') contains both adjacent circle axes.
    Returns (m, n, 4) unit planes and the four-mirror closure residual.
    """
    g = np.asarray(g, dtype=float)
    m, n = g.shape[:2]
    h0 = np.asarray(h0, dtype=float)
    h0 = h0 / np.linalg.norm(h0[:3])
    if abs(h0[:3] @ g[0, 0] + h0[3]) > tol * max(1.0, np.linalg.norm(g[0, 0])):
        raise RegularityError("initial plane must contain the initial point")

    def mirror(a, b):
        return _edge_mirror_from_points(g[a], g[b])

    closure = _closure(mirror, m, n)
    if closure > tol:
        raise RegularityError(f"net is not circular (closure residual {closure:.3g})")
    h = np.full((m, n, 4), np.nan)
    h[0, 0] = h0
    for a, b in _tree_edges(m, n):
        nrm, off = mirror(a, b)
        h[b] = _reflect_plane(h[a], nrm, -off * nrm)
    normals = h[..., :3].reshape(-1, 3)
    degenerate = bool(np.all(np.abs(normals @ normals[0]) > 1 - 1e-12))
    return ReflectionResult(h, closure, degenerate)


def reflection_circular_from_conical(h, g0, tol=1e-9):
    """Points on V obtained by reflecting ``g0`` in the bisector planes of adjacent oriented planes."""
    h = np.asarray(h, dtype=float)
    h = h / np.linalg.norm(h[..., :3], axis=-1, keepdims=True)
    m, n = h.shape[:2]

    def mirror(a, b):
        return _edge_mirror_from_planes(h[a], h[b])

    closure = _closure(mirror, m, n)
    if closure > tol:
        raise RegularityError(f"plane net is not conical (closure residual {closure:.3g})")
    g = np.full((m, n, 3), np.nan)
    g[0, 0] = g0
    for a, b in _tree_edges(m, n):
        g[b] = _reflect_point(g[a], *mirror(a, b))
    return ReflectionResult(g, closure)


@dataclass
class CircularConical:
    binet: Binet
    planes: np.ndarray
    closure: float
    concurrency: np.ndarray

    @property
    def bistar(self):
        """Vertex planes as a bi*net, faces left undetermined."""
        m, n = self.binet.window.shape
        return BiStarNet(self.binet.window, self.planes, np.full((m - 1, n - 1, 4), np.nan))


def circular_conical_binet(g, h0, tol=1e-9):
    """Binet with b(v) = g(v) and b(f) the common point of the four reflected planes around f."""
    res = reflection_conical_from_circular(g, h0, tol)
    if res.degenerate:
        raise RegularityError("all reflected planes are parallel; faces have no finite intersection")
    pts, conc = _intersect_planes(face_corner_stack(res.values), tol)
    if np.nanmax(conc) > tol:
        raise RegularityError(f"reflected planes around a face are not concurrent ({np.nanmax(conc):.3g})")
    m, n = np.asarray(g).shape[:2]
    return CircularConical(Binet(Window.grid(m, n), g, pts), res.values, res.closure, conc)


def tangent_plane(point, normal):
    normal = np.asarray(normal, dtype=float)
    normal = normal / np.linalg.norm(normal)
    return np.append(normal, -normal @ np.asarray(point, dtype=float))


def family_circular_conical(name, m=8, n=6, step=np.pi / 8, tilt=0.3):
    """Built-in circular-conical examples: grid, cylinder, sphere or cone.

    Tangent planes of cylinders and cones are constant along rulings, so the
    four planes around a face would meet in a line; those families start
    from a plane through g(0, 0) tilted away from the tangent plane.
    """
    if name == "grid":
        ii, jj = np.meshgrid(np.arange(m, dtype=float), np.arange(n, dtype=float), indexing="ij")
        g = np.stack([ii, jj, np.zeros((m, n))], axis=-1)
        return circular_conical_binet(g, tangent_plane(g[0, 0], (np.sin(tilt), 0.5 * np.sin(tilt), np.cos(tilt))))
    profile = PROFILES[name](m, n, step)
    g = generate_revolution_circular(profile)
    if name == "sphere":
        normal = g[0, 0]
    else:
        r, z = profile.radii, profile.heights
        normal = np.array([z[1] - z[0], 0.0, -(r[1] - r[0])])
        normal = normal / np.linalg.norm(normal) + np.array([0.0, tilt, tilt])
    return circular_conical_binet(g, tangent_plane(g[0, 0], normal))


# ---------------------------------------------------------------------------
# conjugate nets


def generate_conjugate_net(seed, window, noise=0.1):
    """Seeded Q-net on the window's vertices: each point lies in the plane of its three predecessors.

    The base is a random affine image of the integer grid; ``noise`` scales
    the axis perturbations and the two in-plane coefficients per quad.
    """
    rng = np.random.default_rng(seed)
    m, n = window.shape
    origin = rng.normal(size=3)
    frame = rng.normal(size=(2, 3))
    frame[1] -= (frame[1] @ frame[0]) / (frame[0] @ frame[0]) * frame[0] * 0.5
    p = np.zeros((m, n, 3))
    p[0, 0] = origin
    for i in range(1, m):
        p[i, 0] = p[i - 1, 0] + frame[0] + noise * rng.normal(size=3)
    for j in range(1, n):
        p[0, j] = p[0, j - 1] + frame[1] + noise * rng.normal(size=3)
    for i in range(1, m):
        for j in range(1, n):
            a, b, c = p[i - 1, j - 1], p[i, j - 1], p[i - 1, j]
            alpha, beta = noise * rng.normal(size=2)
            p[i, j] = b + c - a + alpha * (b - a) + beta * (c - a)
    return p


def random_cauchy_data(seed, m, n, noise=0.1, center=None):
    """Generic Cauchy data: Q-net faces near the square centres plus admissible axes.

    Axis edges that own a full cross (both dual faces inside the window) are
    drawn orthogonal to their dual face edge; the others are free.
    """
    rng = np.random.default_rng(seed)
    w = Window.grid(m, n)
    if center is None:
        center = (0, 0)
    ci, cj = center
    faces = generate_conjugate_net(rng.integers(2**31), Window.grid(m - 1, n - 1), noise)
    verts = np.full((m, n, 3), np.nan)
    # centre vertex: inside the parallelogram spanned by nearby faces, shifted off their plane
    fi, fj = min(max(ci, 1), m - 2), min(max(cj, 1), n - 2)
    quad = faces[fi - 1 : fi + 1, fj - 1 : fj + 1].reshape(4, 3) if m > 2 and n > 2 else faces[:1, :1].reshape(1, 3)
    e1 = faces[min(1, m - 2), 0] - faces[0, 0] if m > 2 else np.array([1.0, 0, 0])
    e2 = faces[0, min(1, n - 2)] - faces[0, 0] if n > 2 else np.array([0, 1.0, 0])
    lift = np.cross(e1, e2)
    base = quad.mean(axis=0) + (ci - fi) * e1 + (cj - fj) * e2
    verts[ci, cj] = base + 0.5 * (noise + 0.2) * lift / np.linalg.norm(lift) * np.linalg.norm(e1)

    def axis_step(i, j, di, dj, along):
        # the edge from (i, j) to (i + di, j + dj); dual faces when both exist
        lo_i, lo_j = min(i, i + di), min(j, j + dj)
        if di:
            pair = [(lo_i, lo_j - 1), (lo_i, lo_j)]
        else:
            pair = [(lo_i - 1, lo_j), (lo_i, lo_j)]
        inside = all(0 <= a < m - 1 and 0 <= b < n - 1 for a, b in pair)
        step = along + noise * np.linalg.norm(along) * rng.normal(size=3)
        if inside:
            d = faces[pair[1]] - faces[pair[0]]
            step -= (step @ d) / (d @ d) * d
        return step

    for sgn in (1, -1):
        i = ci
        while 0 <= i + sgn < m:
            verts[i + sgn, cj] = verts[i, cj] + axis_step(i, cj, sgn, 0, sgn * e1)
            i += sgn
        j = cj
        while 0 <= j + sgn < n:
            verts[ci, j + sgn] = verts[ci, j] + axis_step(ci, j, 0, sgn, sgn * e2)
            j += sgn
    return CauchyData(w, faces, verts, (ci, cj))


def cauchy_data_from_binet(b, center=(0, 0)):
    """Restrict a binet to its Cauchy data (faces plus the two axes through ``center``)."""
    ci, cj = center
    v = np.full(b.vertex.shape, np.nan)
    v[ci, :] = b.vertex[ci, :]
    v[:, cj] = b.vertex[:, cj]
    return CauchyData(b.window, b.face.copy(), v, center)


# ---------------------------------------------------------------------------
# propagation


def _sweep(data, order):
    """New vertices in an order where A, P, Q are always known, with their quadrant signs."""
    m, n = data.window.shape
    ci, cj = data.center
    out = []
    for sx in (1, -1):
        for sy in (1, -1):
            ia = range(1, (m - 1 - ci if sx > 0 else ci) + 1)
            ja = range(1, (n - 1 - cj if sy > 0 else cj) + 1)
            if order == "row":
                steps = [(a, b) for a in ia for b in ja]
            elif order == "column":
                steps = [(a, b) for b in ja for a in ia]
            else:
                steps = sorted(((a, b) for a in ia for b in ja), key=lambda t: (t[0] + t[1], t[0]))
            out.extend((ci + sx * a, cj + sy * b, sx, sy) for a, b in steps)
    return out


def _constraints(data, v, i, j, sx, sy):
    """Known quad points and the available orthogonality rows for the new vertex (i, j)."""
    m, n = data.window.shape
    f = data.face
    a, p, q = v[i - sx, j - sy], v[i, j - sy], v[i - sx, j]
    rows, rhs = [], []
    jl = min(j, j - sy)
    if 1 <= i <= m - 2:
        d = f[i, jl] - f[i - 1, jl]  # vertical edge p -> x
        rows.append(d)
        rhs.append(d @ p)
    il = min(i, i - sx)
    if 1 <= j <= n - 2:
        d = f[il, j] - f[il, j - 1]  # horizontal edge q -> x
        rows.append(d)
        rhs.append(d @ q)
    return a, p, q, rows, rhs


def _check_finite(x, where):
    if not np.all(np.isfinite(x)):
        raise DegenerateDataError(f"propagation broke down at {where}", where)


def _solve_with_fallback(rows, rhs, anchor, where, tol=1e-10):
    """Solve rows x = rhs; underdetermined systems take the solution nearest ``anchor``."""
    a = np.asarray(rows)
    r = np.asarray(rhs) - a @ anchor
    s = np.linalg.svd(a, compute_uv=False)
    if s[-1] <= tol * s[0]:
        raise DegenerateDataError(f"singular propagation system at vertex {where}", where)
    if a.shape[0] == 3:
        return anchor + np.linalg.solve(a, r)
    return anchor + np.linalg.lstsq(a, r, rcond=None)[0]


def propagate_principal(data, order="row", tol=1e-10):
    """Unique principal completion of Cauchy data.

    Each new vertex lies in the plane of its three quad neighbours and makes
    both new vertex edges orthogonal to their dual face edges.  At the far
    window boundary one dual face is missing; the point is then the solution
    of the remaining equations nearest to the parallelogram completion.
    """
    v = data.vertex.copy()
    for i, j, sx, sy in _sweep(data, order):
        a, p, q, rows, rhs = _constraints(data, v, i, j, sx, sy)
        nrm = np.cross(p - a, q - a)
        sc = max(np.linalg.norm(p - a), np.linalg.norm(q - a))
        if np.linalg.norm(nrm) <= tol * sc * sc:
            raise DegenerateDataError(f"collinear quad points before vertex {(i, j)}", (i, j))
        v[i, j] = _solve_with_fallback([nrm] + rows, [nrm @ a] + rhs, p + q - a, (i, j), tol)
        _check_finite(v[i, j], (i, j))
    return Binet(data.window, v, data.face.copy())


@dataclass(frozen=True)
class SolutionLine:
    origin: np.ndarray
    direction: np.ndarray
    scale: float

    def at(self, t):
        return self.origin + np.tan(np.pi * (t - 0.5)) * self.scale * self.direction

    def parameter(self, x):
        s = (np.asarray(x) - self.origin) @ self.direction / self.scale
        return 0.5 + np.arctan(s) / np.pi


def solution_line(a, p, q, rows, rhs, tol=1e-10):
    """Line of points satisfying both orthogonality conditions of a new vertex."""
    d1, d2 = rows
    direction = np.cross(d1, d2)
    nd = np.linalg.norm(direction)
    if nd <= tol * np.linalg.norm(d1) * np.linalg.norm(d2):
        raise DegenerateDataError("orthogonality planes are parallel")
    direction = direction / nd
    if direction[np.argmax(np.abs(direction) > 1e-12)] < 0:
        direction = -direction
    centroid = (a + p + q) / 3
    # closest point of the line to the centroid
    lhs = np.array([d1, d2, direction])
    origin = np.linalg.solve(lhs, np.array([rhs[0], rhs[1], direction @ centroid]))
    scale = 0.5 * (np.linalg.norm(p - a) + np.linalg.norm(q - a))
    return SolutionLine(origin, direction, scale)


def propagate_orthogonal(data, freedom, order="row"):
    """Orthogonal completion with one free parameter per new vertex.

    ``freedom`` is an (m, n) array of values in (0, 1), a scalar, or a
    callable ``(i, j) -> value``.  The new point is taken on the solution
    line at ``tan(pi (t - 1/2))`` times the local edge length from the point
    nearest the centroid of the three known quad points.  Boundary vertices
    with a missing dual face are placed exactly as in propagate_principal.
    """
    if callable(freedom):
        pick = freedom
    elif np.ndim(freedom) == 0:
        def pick(i, j):
            return float(freedom)
    else:
        arr = np.asarray(freedom, dtype=float)

        def pick(i, j):
            return arr[i, j]

    v = data.vertex.copy()
    for i, j, sx, sy in _sweep(data, order):
        a, p, q, rows, rhs = _constraints(data, v, i, j, sx, sy)
        if len(rows) == 2:
            t = pick(i, j)
            if not 0 < t < 1:
                raise ValueError(f"freedom at {(i, j)} must lie in (0, 1)")
            try:
                v[i, j] = solution_line(a, p, q, rows, rhs).at(t)
            except DegenerateDataError as exc:
                raise DegenerateDataError(f"{exc} at vertex {(i, j)}", (i, j)) from None
        else:
            nrm = np.cross(p - a, q - a)
            v[i, j] = _solve_with_fallback([nrm] + rows, [nrm @ a] + rhs, p + q - a, (i, j))
        _check_finite(v[i, j], (i, j))
    return Binet(data.window, v, data.face.copy())


def principal_freedom(data, b, order="row"):
    """Freedom values that make propagate_orthogonal reproduce the binet ``b``."""
    m, n = data.window.shape
    t = np.full((m, n), 0.5)
    v = b.vertex
    for i, j, sx, sy in _sweep(data, order):
        a, p, q, rows, rhs = _constraints(data, v, i, j, sx, sy)
        if len(rows) == 2:
            t[i, j] = solution_line(a, p, q, rows, rhs).parameter(v[i, j])
    return t


def random_freedom(seed, shape, low=0.1, high=0.9):
    return np.random.default_rng(seed).uniform(low, high, size=shape)


def generate_principal(seed, m=8, n=8, noise=0.1, center=None):
    return propagate_principal(random_cauchy_data(seed, m, n, noise, center))


def generate_orthogonal(seed, m=8, n=8, noise=0.1, center=None):
    data = random_cauchy_data(seed, m, n, noise, center)
    return propagate_orthogonal(data, random_freedom(seed + 7919, (m, n)))


def perturb_vertex(b, seed, size=1e-3, cell=None):
    """Move one interior vertex by a random vector of the given length."""
    rng = np.random.default_rng(seed)
    m, n = b.window.shape
    i, j = cell if cell is not None else (int(rng.integers(1, m - 1)), int(rng.integers(1, n - 1)))
    d = rng.normal(size=3)
    out = b.copy()
    out.vertex[i, j] += size * d / np.linalg.norm(d)
    return out

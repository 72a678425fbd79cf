"""Z^3 binets: conjugate face nets, polar cube completion and principal extension.

Array layout on an (a, b, c) vertex box: vertices (a, b, c, k); 12-faces
(a-1, b-1, c, k); 13-faces (a-1, b, c-1, k); 23-faces (a, b-1, c-1, k), each
indexed by the face's lower corner.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import permutations

import numpy as np

from .binet import Binet, make_report, planarity_residuals
from .constructors import DegenerateDataError, cauchy_data_from_binet, propagate_principal, CauchyData
from .lattice import FACE, PLANES, VERTEX, Face, Vertex, Window, crosses, face_vertices, vertex_faces
from .lifts import moebius_coordinates
from .projective import MOEBIUS, inner, normalize, null_space, numerical_rank, row_space, singular_values, unit_rows

AXES = {12: (0, 1), 13: (0, 2), 23: (1, 2)}


def face_shape(shape, plane):
    a, b = AXES[plane]
    s = list(shape)
    s[a] -= 1
    s[b] -= 1
    return tuple(s)


class Binet3D:
    """Points (or homogeneous vectors) on the vertices and the three face families of a box."""

    def __init__(self, window, vertex, faces, ambient="E3"):
        self.window = window
        self.vertex = np.asarray(vertex, dtype=float)
        self.faces = {p: np.asarray(faces[p], dtype=float) for p in PLANES}
        self.ambient = ambient
        shape = window.shape
        if self.vertex.shape[:3] != shape:
            raise ValueError("vertex array does not fit the window")
        for p in PLANES:
            if self.faces[p].shape[:3] != face_shape(shape, p):
                raise ValueError(f"{p}-face array does not fit the window")

    @property
    def homogeneous(self):
        return self.ambient != "E3"

    def _idx(self, cell):
        return tuple(c - o for c, o in zip(cell.coords, self.window.origin))

    def __getitem__(self, cell):
        arr = self.vertex if cell.kind == VERTEX else self.faces[cell.plane]
        idx = self._idx(cell)
        if any(i < 0 or i >= s for i, s in zip(idx, arr.shape)):
            raise IndexError(f"{cell} outside window")
        return arr[idx]

    def get(self, cell):
        try:
            val = self[cell]
        except IndexError:
            return None
        return val if np.all(np.isfinite(val)) else None

    def __setitem__(self, cell, value):
        arr = self.vertex if cell.kind == VERTEX else self.faces[cell.plane]
        arr[self._idx(cell)] = value

    def slice(self, plane, level):
        """Two-dimensional binet of one coordinate plane (vertices plus its own face family)."""
        a, b = AXES[plane]
        other = 3 - a - b
        take = [slice(None)] * 3
        take[other] = level
        take = tuple(take)
        w = Window.grid(self.window.shape[a], self.window.shape[b])
        return Binet(w, self.vertex[take], self.faces[plane][take], self.ambient)

    def map(self, fn, ambient=None):
        return Binet3D(self.window, fn(self.vertex), {p: fn(self.faces[p]) for p in PLANES}, ambient or self.ambient)


def empty_binet3d(shape, k, ambient="E3"):
    w = Window.box(*shape)
    return Binet3D(w, np.full(tuple(shape) + (k,), np.nan), {p: np.full(face_shape(shape, p) + (k,), np.nan) for p in PLANES}, ambient)


# ---------------------------------------------------------------------------
# checks


def _vertex_quad_stacks(vertex):
    out = {}
    for p, (a, b) in AXES.items():
        def sl(da, db):
            idx = [slice(None)] * 3
            idx[a] = slice(da, vertex.shape[a] - 1 + da)
            idx[b] = slice(db, vertex.shape[b] - 1 + db)
            return vertex[tuple(idx)]

        out[p] = np.stack([sl(0, 0), sl(1, 0), sl(1, 1), sl(0, 1)], axis=3)
    return out


def check_conjugate_3d(bn, tol=1e-9):
    """Planar vertex quads in all three families and coplanar faces around every vertex."""
    vals, labels, degen = [], [], []
    for p, stack in _vertex_quad_stacks(bn.vertex).items():
        r, d = planarity_residuals(stack, bn.homogeneous)
        for idx in np.ndindex(r.shape):
            vals.append(r[idx])
            degen.append(d[idx])
            labels.append(Face(*idx, plane=p))
    for v in bn.window.vertices():
        pts = [x for x in (bn.get(f) for f in vertex_faces(v).cells) if x is not None]
        labels.append(v)
        if len(pts) < 4:
            vals.append(np.nan)
            degen.append(False)
            continue
        # collinear groups occur at boundary vertices and are trivially coplanar
        r, _ = planarity_residuals(np.array(pts), bn.homogeneous)
        vals.append(float(r))
        degen.append(False)
    return make_report("conjugate3d", np.array(vals), labels, tol, np.array(degen))


def check_orthogonal_3d(bn, tol=1e-9):
    """Every cross of the box: |<dv, df>| / (|dv| |df|)."""
    vals, labels = [], []
    for cr in crosses(bn.window):
        v, f, w, g = (bn.get(c) for c in cr)
        labels.append(cr)
        if any(x is None for x in (v, f, w, g)):
            vals.append(np.nan)
            continue
        dv, df = w - v, g - f
        vals.append(abs(dv @ df) / (np.linalg.norm(dv) * np.linalg.norm(df)))
    return make_report("orthogonal3d", np.array(vals), labels, tol)


@dataclass
class PrincipalReport3D:
    conjugate: object
    orthogonal: object

    @property
    def passed(self):
        return self.conjugate.passed and self.orthogonal.passed


def check_principal_3d(bn, tol=1e-9):
    return PrincipalReport3D(check_conjugate_3d(bn, tol), check_orthogonal_3d(bn, tol))


def check_polar_3d(bn, form=MOEBIUS, tol=1e-9):
    vals, labels = [], []
    for f in bn.window.faces():
        x = bn.get(f)
        for v in face_vertices(f):
            y = bn.get(v)
            labels.append((v, f))
            if x is None or y is None:
                vals.append(np.nan)
            else:
                vals.append(abs(inner(form, normalize(x), normalize(y))))
    return make_report("polar3d", np.array(vals), labels, tol)


# ---------------------------------------------------------------------------
# meets


def meet_planes(bases, tol=1e-9):
    """Common point of projective subspaces given by row bases.

    Stacks the annihilators and takes the smallest right singular vector.
    Returns (point, residual) where residual = s_min / s_max; raises if the
    meet is not a single point.
    """
    ann = np.vstack([null_space(b) for b in bases])
    _, s, vt = np.linalg.svd(ann)
    full = np.zeros(ann.shape[1])
    full[: s.size] = s
    if full[-2] <= tol * full[0]:
        raise DegenerateDataError("subspaces meet in more than a point")
    return normalize(vt[-1]), float(full[-1] / full[0])


# ---------------------------------------------------------------------------
# polar cube completion


VERTEX_LABELS = ("", "1", "2", "3", "12", "13", "23", "123")
BOTTOM_FACES = ("12", "13", "23")
TOP_FACES = ("12_3", "13_2", "23_1")
FACE_CORNERS = {
    "12": ("", "1", "12", "2"),
    "13": ("", "1", "13", "3"),
    "23": ("", "2", "23", "3"),
    "12_3": ("3", "13", "123", "23"),
    "13_2": ("2", "12", "123", "23"),
    "23_1": ("1", "12", "123", "13"),
}


@dataclass
class CubeData:
    """Points of one cube of a polar binet in RP^4.

    ``vertices`` maps labels "", "1", ..., "123" to 5-vectors, ``faces``
    maps "12", "13", "23" (bottom) and "12_3", "13_2", "23_1" (top) to
    5-vectors, ``vertex_planes`` maps vertex labels to (3, 5) row bases.
    """

    vertices: dict
    faces: dict
    vertex_planes: dict
    residuals: dict = field(default_factory=dict)

    def hidden(self):
        """Copy without v123, the top faces and the plane of v123."""
        return CubeData(
            {k: v for k, v in self.vertices.items() if k != "123"},
            {k: v for k, v in self.faces.items() if k in BOTTOM_FACES},
            {k: v for k, v in self.vertex_planes.items() if k != "123"},
        )


def _face_label(face, perm):
    """Relabel a face under a permutation of the three directions."""
    if "_" in face:
        a, b = face.split("_")
        pair = "".join(sorted(perm[c] for c in a))
        return f"{pair}_{perm[b]}"
    return "".join(sorted(perm[c] for c in face))


def _vertex_label(v, perm):
    return "".join(sorted(perm[c] for c in v))


def permute_cube(data, order):
    """Relabel a cube under the direction permutation 1 -> order[0], 2 -> order[1], 3 -> order[2]."""
    perm = dict(zip("123", order))
    return CubeData(
        {_vertex_label(k, perm): v for k, v in data.vertices.items()},
        {_face_label(k, perm): v for k, v in data.faces.items()},
        {_vertex_label(k, perm): v for k, v in data.vertex_planes.items()},
    )


def cube_polarity_residuals(data):
    """|<face, corner>| on unit vectors for every face-corner pair present."""
    out = {}
    for f, corners in FACE_CORNERS.items():
        if f not in data.faces:
            continue
        for c in corners:
            if c in data.vertices:
                out[(f, c)] = float(abs(inner(MOEBIUS, normalize(data.faces[f]), normalize(data.vertices[c]))))
    return out


def complete_polar_cube(data, tol=1e-9):
    """Fill in v123, the three top faces and the plane of v123.

    Each top face is the meet of the planes of its three known corners; v123
    is the meet of the top faces' planes (each spanned by three known
    corners).  All new polarity relations are then measured; they hold
    without any correction when the input is a valid polar cube.
    """
    for k in VERTEX_LABELS[:-1]:
        if k not in data.vertices:
            raise ValueError(f"cube data lacks vertex {k or 'v'}")
    vp, vx = data.vertex_planes, data.vertices
    faces = dict((k, data.faces[k]) for k in BOTTOM_FACES)
    meet_res = {}
    for top in TOP_FACES:
        corners = [c for c in FACE_CORNERS[top] if c != "123"]
        faces[top], meet_res[top] = meet_planes([vp[c] for c in corners], tol)
    spans = [unit_rows(np.array([vx[c] for c in FACE_CORNERS[top] if c != "123"])) for top in TOP_FACES]
    v123, meet_res["123"] = meet_planes(spans, tol)
    vertices = dict(vx)
    vertices["123"] = v123
    planes = dict(vp)
    planes["123"] = row_space(unit_rows(np.array([faces[t] for t in TOP_FACES])))
    out = CubeData(vertices, faces, planes)
    pol = cube_polarity_residuals(out)
    new = {k: r for k, r in pol.items() if k[0] in TOP_FACES}
    out.residuals = {"meet": meet_res, "polarity": new, "max_polarity": max(new.values())}
    return out


def random_polar_cube(seed):
    """Valid polar cube data in RP^4 built forward from random choices.

    Bottom faces are random; each vertex is random in the polar of its known
    faces and, from the second layer on, in the plane of its quad; v123 is
    the Q-net completion; each top face is random in the polar line of its
    four corners; vertex planes are spanned by the three incident cube faces.
    """
    rng = np.random.default_rng(seed)

    def rand_in(basis):
        return normalize(rng.normal(size=basis.shape[0]) @ basis)

    def polar_basis(points):
        return null_space(np.array(points) @ MOEBIUS.gram)

    f = {k: normalize(rng.normal(size=5)) for k in BOTTOM_FACES}
    v = {"": rand_in(polar_basis([f["12"], f["13"], f["23"]]))}
    v["1"] = rand_in(polar_basis([f["12"], f["13"]]))
    v["2"] = rand_in(polar_basis([f["12"], f["23"]]))
    v["3"] = rand_in(polar_basis([f["13"], f["23"]]))
    v["12"] = rand_in(row_space(np.array([v[""], v["1"], v["2"]])))
    v["13"] = rand_in(row_space(np.array([v[""], v["1"], v["3"]])))
    v["23"] = rand_in(row_space(np.array([v[""], v["2"], v["3"]])))
    spans = [row_space(np.array([v[a], v[b], v[c]])) for a, b, c in (("1", "12", "13"), ("2", "12", "23"), ("3", "13", "23"))]
    v["123"], _ = meet_planes(spans)
    for top in TOP_FACES:
        f[top] = rand_in(polar_basis([v[c] for c in FACE_CORNERS[top]]))
    planes = {}
    for label in VERTEX_LABELS:
        inc = [k for k, cs in FACE_CORNERS.items() if label in cs]
        planes[label] = row_space(unit_rows(np.array([f[k] for k in inc])))
    return CubeData(v, f, planes)


def projective_distance(x, y):
    """Distance between unit representatives with aligned sign."""
    x, y = normalize(x), normalize(y)
    return float(min(np.linalg.norm(x - y), np.linalg.norm(x + y)))


def cube_discrepancy(a, b):
    keys = [("v", "123")] + [("f", t) for t in TOP_FACES]
    return max(
        projective_distance((a.vertices if k == "v" else a.faces)[n], (b.vertices if k == "v" else b.faces)[n])
        for k, n in keys
    )


def permutation_discrepancy(data, tol=1e-9):
    """Largest change of the completion over all six direction relabellings."""
    base = complete_polar_cube(data, tol)
    worst = 0.0
    for order in permutations("123"):
        perm = dict(zip("123", order))
        inv = {b: a for a, b in perm.items()}
        done = complete_polar_cube(permute_cube(data, order), tol)
        back = permute_cube(done, "".join(inv[c] for c in "123"))
        worst = max(worst, cube_discrepancy(base, back))
    return worst


# ---------------------------------------------------------------------------
# face-net completion


def _line_meet(p1, p2, q1, q2):
    """Meeting point of the projective lines p1 p2 and q1 q2 with a skewness residual."""
    rows = unit_rows(np.array([p1, p2, q1, q2]))
    _, s, vt = np.linalg.svd(np.stack([rows[0], rows[1], -rows[2], -rows[3]], axis=1))
    full = np.zeros(4)
    full[: s.size] = s
    if full[2] <= 1e-12 * full[0]:
        raise DegenerateDataError("lines coincide")
    c = vt[-1]
    return normalize(c[0] * rows[0] + c[1] * rows[1]), float(full[3] / full[0])


def _plane_of(points):
    """Plane [u, h] through coplanar points (least squares)."""
    c = points.mean(axis=0)
    _, _, vt = np.linalg.svd(points - c)
    u = vt[-1]
    return np.append(u, -u @ c)


def facenet_completion(g, tol=1e-8):
    """Complete a conjugate net on the 12-faces to all three face families.

    ``g`` has shape (p, q, r, k) and is read as the values on 12-faces with
    lower corners (i, j, k).  Points in E3 (k = 3) are handled in
    homogeneous coordinates; a meeting point at infinity is an error for
    them and a regular value for homogeneous input.  The 13-face at r is the meeting point of the
    lines g(r - e2) g(r) and g(r - e2 + e3) g(r + e3); the 23-face at r uses
    e1 in place of e2.  Faces whose lines leave the data stay NaN.  Each
    value is cross-checked against the meet of the four vertex planes.
    Returns the face arrays for a vertex box of shape (p + 1, q + 1, r).
    """
    g = np.asarray(g, dtype=float)
    euclidean = g.shape[-1] == 3
    hom = np.concatenate([g, np.ones(g.shape[:-1] + (1,))], axis=-1) if euclidean else g
    p, q, r = g.shape[:3]
    shape = (p + 1, q + 1, r)
    k = g.shape[-1]
    faces = {12: g.copy(), 13: np.full(face_shape(shape, 13) + (k,), np.nan), 23: np.full(face_shape(shape, 23) + (k,), np.nan)}
    skew = []
    for plane, back in ((13, np.array([0, 1, 0])), (23, np.array([1, 0, 0]))):
        arr = faces[plane]
        for idx in np.ndindex(arr.shape[:3]):
            s = np.array(idx)
            a, b = s - back, s + np.array([0, 0, 1])
            c = a + np.array([0, 0, 1])
            pts = []
            for t in (a, s, c, b):
                if np.all(t >= 0) and t[0] < p and t[1] < q and t[2] < r:
                    pts.append(hom[tuple(t)])
            if len(pts) < 4:
                continue
            x, res = _line_meet(*pts)
            if res > tol:
                raise DegenerateDataError(f"lines of {plane}-face {idx} are skew ({res:.3g}); input is not conjugate", idx)
            if euclidean:
                if abs(x[3]) <= 1e-12 * np.linalg.norm(x[:3]):
                    raise DegenerateDataError(f"{plane}-face {idx} lies at infinity", idx)
                x = x[:3] / x[3]
            arr[idx] = x
            skew.append(res)
    out = Binet3D(Window.box(*shape), np.full(shape + (k,), np.nan), faces, "E3" if euclidean else "RP3")
    return out, (max(skew) if skew else 0.0)


def vertex_plane_meet_check(g, completed):
    """Distance of each completed face to the planes of g-quads around its corners, over scale."""
    p, q, r = g.shape[:3]
    worst = 0.0
    scale = np.nanmean(np.linalg.norm(np.diff(g, axis=0), axis=-1))
    for plane in (13, 23):
        arr = completed.faces[plane]
        for idx in np.ndindex(arr.shape[:3]):
            x = arr[idx]
            if not np.all(np.isfinite(x)):
                continue
            for v in face_vertices(Face(*idx, plane=plane)):
                i, j, k = v.coords
                quad = [(i - 1, j - 1, k), (i, j - 1, k), (i, j, k), (i - 1, j, k)]
                if all(0 <= a < p and 0 <= b < q and 0 <= c < r for a, b, c in quad):
                    pl = _plane_of(np.array([g[t] for t in quad]))
                    worst = max(worst, abs(pl[:3] @ x + pl[3]) / scale)
    return worst


def check_facenet_3d(bn, tol=1e-8):
    """Coplanarity of the defined faces around every vertex."""
    vals, labels = [], []
    for v in bn.window.vertices():
        pts = [x for x in (bn.get(f) for f in vertex_faces(v).cells) if x is not None]
        labels.append(v)
        vals.append(float(planarity_residuals(np.array(pts), bn.homogeneous)[0]) if len(pts) >= 4 else np.nan)
    return make_report("facenet", np.array(vals), labels, tol)


def generate_conjugate_net_3d(seed, shape, noise=0.1):
    """Seeded Q-net on a vertex box in E3: random axes planes, cube-by-cube completion."""
    rng = np.random.default_rng(seed)
    frame = np.eye(3) + 0.2 * rng.normal(size=(3, 3))
    x = np.full(tuple(shape) + (3,), np.nan)
    x[0, 0, 0] = rng.normal(size=3)
    for axis in range(3):
        for t in range(1, shape[axis]):
            idx, prev = [0, 0, 0], [0, 0, 0]
            idx[axis], prev[axis] = t, t - 1
            x[tuple(idx)] = x[tuple(prev)] + frame[axis] + noise * rng.normal(size=3)
    for a, b in ((0, 1), (0, 2), (1, 2)):
        for s in range(1, shape[a]):
            for t in range(1, shape[b]):
                def at(da, db):
                    i = [0, 0, 0]
                    i[a], i[b] = s - da, t - db
                    return tuple(i)

                base, pa, pb = x[at(1, 1)], x[at(0, 1)], x[at(1, 0)]
                al, be = noise * rng.normal(size=2)
                x[at(0, 0)] = pa + pb - base + al * (pa - base) + be * (pb - base)
    for i in range(1, shape[0]):
        for j in range(1, shape[1]):
            for k in range(1, shape[2]):
                x[i, j, k] = _qnet_cube_vertex(x, i, j, k)
    return x


def _qnet_cube_vertex(x, i, j, k):
    """Fourth vertex: meet of the three planes through v_a, v_ab, v_ac."""
    v1, v2, v3 = x[i, j - 1, k - 1], x[i - 1, j, k - 1], x[i - 1, j - 1, k]
    v12, v13, v23 = x[i, j, k - 1], x[i, j - 1, k], x[i - 1, j, k]
    planes = [_plane_of(np.array(t)) for t in ((v1, v12, v13), (v2, v12, v23), (v3, v13, v23))]
    a = np.array([pl[:3] for pl in planes])
    return np.linalg.solve(a, -np.array([pl[3] for pl in planes]))


# ---------------------------------------------------------------------------
# principal extension to Z^3


def _incident_pairs(cells):
    cellset = set(cells)
    out = {c: [] for c in cells}
    for c in cells:
        if c.kind == FACE:
            for v in face_vertices(c):
                if v in cellset:
                    out[c].append(v)
                    out[v].append(c)
    return out


def solve_potential_on_cells(values, rho0=0.0):
    """Additive potential over an arbitrary finite set of cells (dict cell -> point)."""
    cells = sorted(values, key=lambda c: (0 if c.kind == VERTEX else 1, c.coords, c.plane or 0))
    adj = _incident_pairs(cells)
    rho = {cells[0]: rho0}
    queue = deque([cells[0]])
    while queue:
        a = queue.popleft()
        for b in adj[a]:
            if b not in rho:
                rho[b] = values[a] @ values[b] - rho[a]
                queue.append(b)
    if len(rho) != len(cells):
        raise DegenerateDataError("initial data are not connected")
    return rho


@dataclass
class Extension:
    binet: Binet3D
    lift: Binet3D
    initial_polarity: float
    max_cube_polarity: float
    max_meet_residual: float


def _assemble_initial(slices, n):
    s12, s13, s23 = slices
    bn = empty_binet3d((n, n, n), 3)
    bn.vertex[:, :, 0] = s12.vertex
    bn.faces[12][:, :, 0] = s12.face
    for name, sl, take, fplane in (("13", s13, (slice(None), 0, slice(None)), 13), ("23", s23, (0, slice(None), slice(None)), 23)):
        prev = bn.vertex[take]
        known = np.all(np.isfinite(prev), axis=-1)
        if np.max(np.abs(prev[known] - sl.vertex[known]), initial=0.0) > 1e-9:
            raise ValueError(f"slice {name} disagrees with the shared axis")
        bn.vertex[take] = sl.vertex
        bn.faces[fplane][take] = sl.face
    return bn


def _vertex_plane(lift, v, tol):
    pts = [x for x in (lift.get(f) for f in vertex_faces(v).cells) if x is not None]
    if len(pts) < 3:
        raise DegenerateDataError(f"plane of {v} is not determined yet", v)
    rows = unit_rows(np.array(pts))
    s = singular_values(rows)
    if s.size > 3 and s[3] > tol * s[0]:
        raise DegenerateDataError(f"faces around {v} are not coplanar ({s[3] / s[0]:.3g})", v)
    if s.size < 3 or s[2] <= tol * s[0]:
        raise DegenerateDataError(f"plane of {v} is not determined yet", v)
    return row_space(rows)[:3]


CUBE_OFFSETS = {"": (0, 0, 0), "1": (1, 0, 0), "2": (0, 1, 0), "3": (0, 0, 1), "12": (1, 1, 0), "13": (1, 0, 1), "23": (0, 1, 1), "123": (1, 1, 1)}
FACE_CELLS = {"12": (12, (0, 0, 0)), "13": (13, (0, 0, 0)), "23": (23, (0, 0, 0)), "12_3": (12, (0, 0, 1)), "13_2": (13, (0, 1, 0)), "23_1": (23, (1, 0, 0))}


def _cube_order(count, order):
    cubes = [(a, b, c) for a in range(count) for b in range(count) for c in range(count)]
    if order == "kji":
        return sorted(cubes, key=lambda t: (t[2], t[1], t[0]))
    if order == "ijk":
        return cubes
    return sorted(cubes, key=lambda t: (sum(t), t))


def extend_principal_to_z3(slices, rho0=0.0, order="kji", tol=1e-9):
    """Principal binet on a cube of Z^3 from principal binets on the three coordinate planes.

    ``slices`` are 2D binets on n x n windows: the (i, j) plane at k = 0,
    the (i, k) plane at j = 0 and the (j, k) plane at i = 0.  Their union is
    lifted to the Moebius quadric's ambient space, cubes are completed one by
    one, and the result is projected back.  Planes of the outermost vertices
    are never determined, so the output box has n - 1 vertices per axis.
    """
    n = slices[0].window.shape[0]
    init = _assemble_initial(slices, n)
    values = {}
    for c in init.window.cells():
        x = init.get(c)
        if x is not None:
            values[c] = x
    rho = solve_potential_on_cells(values, rho0)
    lift = empty_binet3d((n, n, n), 5, "Moebius")
    for c, x in values.items():
        lift[c] = moebius_coordinates(x, rho[c])
    pol = check_polar_3d(lift, MOEBIUS, tol)
    if not pol.passed:
        raise DegenerateDataError(f"initial data have no polar lift (residual {pol.max_residual:.3g} at {pol.worst})", pol.worst)
    worst_pol = worst_meet = 0.0
    for a, b, c in _cube_order(n - 2, order):
        base = np.array([a, b, c])

        def cell(label):
            return Vertex(*(base + CUBE_OFFSETS[label]))

        def fcell(label):
            plane, off = FACE_CELLS[label]
            return Face(*(base + off), plane=plane)

        data = CubeData(
            {k: lift[cell(k)] for k in VERTEX_LABELS[:-1]},
            {k: lift[fcell(k)] for k in BOTTOM_FACES},
            {k: _vertex_plane(lift, cell(k), tol) for k in VERTEX_LABELS[1:-1]},
        )
        try:
            done = complete_polar_cube(data, tol)
        except DegenerateDataError as exc:
            raise DegenerateDataError(f"cube at {(a, b, c)}: {exc}", (a, b, c)) from None
        worst_pol = max(worst_pol, done.residuals["max_polarity"])
        worst_meet = max(worst_meet, max(done.residuals["meet"].values()))
        lift[cell("123")] = done.vertices["123"]
        for t in TOP_FACES:
            lift[fcell(t)] = done.faces[t]
    m = n - 1
    trimmed = Binet3D(
        Window.box(m, m, m),
        lift.vertex[:m, :m, :m],
        {p: lift.faces[p][tuple(slice(0, s) for s in face_shape((m, m, m), p))] for p in PLANES},
        "Moebius",
    )

    def project(x):
        with np.errstate(invalid="ignore", divide="ignore"):
            return x[..., :3] / (x[..., 4] - x[..., 3])[..., None]

    return Extension(trimmed.map(project, "E3"), trimmed, pol.max_residual, worst_pol, worst_meet)


# ---------------------------------------------------------------------------
# initial data for the extension


def _closest_on_constraints(rows, rhs, target):
    a = np.asarray(rows, dtype=float)
    r = np.asarray(rhs, dtype=float) - a @ target
    return target + np.linalg.lstsq(a, r, rcond=None)[0]


def _coplanar_row(p, q, s):
    """Row/rhs of the plane through three points."""
    nrm = np.cross(q - p, s - p)
    nrm /= np.linalg.norm(nrm)
    return nrm, nrm @ p


def _orth_row(dv, f):
    """<dv, f - x> = 0 written as row . x = rhs."""
    return dv, dv @ f


def _qnet_fill(axes_rows, axes_cols, rng, noise):
    """Q-net with given first row and first column (shapes (p, 3), (q, 3))."""
    p, q = axes_rows.shape[0], axes_cols.shape[0]
    x = np.zeros((p, q, 3))
    x[:, 0] = axes_rows
    x[0, :] = axes_cols
    for i in range(1, p):
        for j in range(1, q):
            a, b, c = x[i - 1, j - 1], x[i, j - 1], x[i - 1, j]
            al, be = noise * rng.normal(size=2)
            x[i, j] = b + c - a + al * (b - a) + be * (c - a)
    return x


def generate_initial_slices(base, seed=0, noise=0.05):
    """Three coordinate-plane principal binets that fit together around the axes.

    ``base`` is the principal binet on the (i, j) plane.  The k-axis and
    the axis rows of the two other face nets are drawn so that faces around
    each axis vertex are coplanar and each axis edge is orthogonal to its
    mixed pair of faces; the rest of each face net is a seeded Q-net and the
    vertices follow by principal propagation.
    """
    rng = np.random.default_rng(seed)
    n = base.window.shape[0]
    if base.window.shape != (n, n):
        raise ValueError("base slice must be square")
    V, F12 = base.vertex, base.face
    e1, e2 = V[1, 0] - V[0, 0], V[0, 1] - V[0, 0]
    ell = 0.5 * (np.linalg.norm(e1) + np.linalg.norm(e2))
    nrm = np.cross(e1, e2)
    nrm = nrm / np.linalg.norm(nrm) * ell
    kax = np.zeros((n, 3))
    kax[0] = V[0, 0]
    for k in range(1, n):
        kax[k] = kax[k - 1] + nrm + noise * ell * rng.normal(size=3)
    f13 = np.zeros((n - 1, 3))  # F13(i, 0, 0)
    f23 = np.zeros((n - 1, 3))  # F23(0, j, 0)
    dk0 = kax[1] - kax[0]
    # i-axis faces of the 13 family
    for i in range(n - 1):
        target = F12[i, 0] - 0.5 * e2 + 0.5 * dk0 + noise * ell * rng.normal(size=3)
        rows = [_orth_row(V[i + 1, 0] - V[i, 0], F12[i, 0])]
        if i > 0:
            rows.append(_coplanar_row(F12[i - 1, 0], F12[i, 0], f13[i - 1]))
        f13[i] = _closest_on_constraints([r for r, _ in rows], [s for _, s in rows], target)
    g13k = np.zeros((n - 1, 3))  # F13(0, 0, k)
    g23k = np.zeros((n - 1, 3))  # F23(0, 0, k)
    g13k[0] = f13[0]
    for j in range(n - 1):
        target = F12[0, j] - 0.5 * e1 + 0.5 * dk0 + noise * ell * rng.normal(size=3)
        rows = [_orth_row(V[0, j + 1] - V[0, j], F12[0, j])]
        if j > 0:
            rows.append(_coplanar_row(F12[0, j - 1], F12[0, j], f23[j - 1]))
        else:
            rows.append(_orth_row(kax[1] - kax[0], f13[0]))
        f23[j] = _closest_on_constraints([r for r, _ in rows], [s for _, s in rows], target)
    g23k[0] = f23[0]
    # k-axis faces of both families
    for k in range(1, n - 1):
        dk = kax[k + 1] - kax[k]
        g13k[k] = g13k[k - 1] + dk + noise * ell * rng.normal(size=3)
        target = g23k[k - 1] + dk + noise * ell * rng.normal(size=3)
        rows = [_orth_row(dk, g13k[k]), _coplanar_row(g13k[k - 1], g13k[k], g23k[k - 1])]
        g23k[k] = _closest_on_constraints([r for r, _ in rows], [s for _, s in rows], target)
    face13 = _qnet_fill(f13, g13k, rng, noise)
    face23 = _qnet_fill(f23, g23k, rng, noise)
    w = Window.grid(n, n)
    ax13 = np.full((n, n, 3), np.nan)
    ax13[:, 0] = V[:, 0]
    ax13[0, :] = kax
    ax23 = np.full((n, n, 3), np.nan)
    ax23[:, 0] = V[0, :]
    ax23[0, :] = kax
    s13 = propagate_principal(CauchyData(w, face13, ax13, (0, 0)))
    s23 = propagate_principal(CauchyData(w, face23, ax23, (0, 0)))
    return base, s13, s23


def grid_slices(n):
    """Coordinate-plane slices of the integer cube grid."""
    g = grid_binet_3d(n)
    return g.slice(12, 0), g.slice(13, 0), g.slice(23, 0)


def grid_binet_3d(n):
    """Integer cube grid with every face at its centre."""
    idx = np.stack(np.meshgrid(*(np.arange(n, dtype=float),) * 3, indexing="ij"), axis=-1)
    faces = {}
    for p, (a, b) in AXES.items():
        shape = face_shape((n, n, n), p)
        f = np.stack(np.meshgrid(*(np.arange(s, dtype=float) for s in shape), indexing="ij"), axis=-1)
        f[..., a] += 0.5
        f[..., b] += 0.5
        faces[p] = f
    return Binet3D(Window.box(n, n, n), idx, faces)


# ---------------------------------------------------------------------------
# symmetric completion


@dataclass
class SymmetricReport:
    first: object
    second: object

    @property
    def agree(self):
        return self.first.passed == self.second.passed


def symmetric_pair(g, h):
    """Binets (g, ceil h) and (h, ceil g') where g' is g read on the 12-faces of h's lattice."""
    g = np.asarray(g, dtype=float)
    h = np.asarray(h, dtype=float)
    a, b, c = g.shape[:3]
    if h.shape[:3] != (a - 1, b - 1, c):
        raise ValueError("h must live on the 12-faces of g's box")
    ch, _ = facenet_completion(h)
    first = Binet3D(Window.box(a, b, c), g, ch.faces)
    shifted = g[1 : a - 1, 1 : b - 1, :]
    cg, _ = facenet_completion(shifted)
    second = Binet3D(Window.box(a - 1, b - 1, c), h, cg.faces)
    return first, second


def check_symmetric_completion(g, h, tol=1e-8):
    """Compare principal status of (g, ceil h) and (h, ceil g)."""
    first, second = symmetric_pair(g, h)
    return SymmetricReport(check_principal_3d(first, tol), check_principal_3d(second, tol))

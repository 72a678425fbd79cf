"""Moebius, Laguerre and Lie lifts of binets, their potentials and decoders.

Coordinates in R^{4,1}: a point p with potential rho lifts to
``(p, rho - 1/2, rho + 1/2)``, i.e. ``p + e0 + 2 rho e_inf`` with
``e_inf = (e5 + e4)/2`` and ``e0 = (e5 - e4)/2``.  Then
``<x, x'> = <p, p'> - rho - rho'``.

A plane ``{<u, x> + h = 0}`` with potential sigma lifts to ``[u, sigma, h]``
for the degenerate form (+++-0).  Both embed into R^{4,2}; the plane lift
goes to ``u - 2 h e_inf + sigma e6``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .binet import (
    BiStarNet,
    Binet,
    CellMap,
    RegularityError,
    box_planes,
    check_conjugate,
    check_orthogonal,
    check_polar_binet,
    cross_labels,
    cross_stacks,
    flat_cell,
    flat_values,
    incident_pair_labels,
    incident_pair_stacks,
    make_report,
    orient_coherently,
    plane_from_equation,
    spanning_tree,
    unflat_cell,
    unflat_values,
)
from .lattice import Face, Vertex
from .projective import BLASCHKE, LIE, MOEBIUS, UNIT_SPHERE, DegenerateError, inner, random_form_isometry, unit_rows

E_INF = np.array([0.0, 0.0, 0.0, 0.5, 0.5])
E_ZERO = np.array([0.0, 0.0, 0.0, -0.5, 0.5])
B_LIE = np.array([0.0, 0.0, 0.0, 1.0, 1.0, 0.0])
M_LIE = np.array([0.0, 0.0, 0.0, 0.0, 0.0, 1.0])


class LiftError(ValueError):
    """A lift does not exist for the given data (residual gate failed)."""

    def __init__(self, message, worst=None, residual=None, lift=None):
        super().__init__(message)
        self.worst = worst
        self.residual = residual
        self.lift = lift


class PointAtInfinityError(ValueError):
    pass


# ---------------------------------------------------------------------------
# potentials


def _cross_scale(b):
    """Mean squared length of the edges that occur in crosses."""
    vals = []
    for v, f, w, g in cross_stacks(b):
        for a, c in ((v, f), (w, f), (v, g), (w, g)):
            d = np.sum((a - c) ** 2, axis=-1)
            vals.append(d[np.isfinite(d)])
    vals = np.concatenate(vals) if vals else np.zeros(0)
    return float(vals.mean()) if vals.size else 1.0


def solve_additive_potential(b, rho0=0.0, anchor=None):
    """Potential with <b(d), b(d')> = rho(d) + rho(d') on every incident pair.

    Propagated along a breadth-first spanning tree of the incidence graph
    rooted at ``anchor`` (default: the smallest cell).  Returns the potential
    as a scalar CellMap and the cycle report: per cross the alternating sum
    of the four incident products, divided by the mean squared edge length.
    """
    w = b.window
    pts = flat_values(b)
    defined = np.all(np.isfinite(pts), axis=1)
    root = None if anchor is None else flat_cell(w, anchor)
    root, order = spanning_tree(w, defined, root)
    rho = np.full(pts.shape[0], np.nan)
    rho[root] = rho0
    for child, parent in order:
        rho[child] = pts[child] @ pts[parent] - rho[parent]
    pot = CellMap(w, *unflat_values(w, rho))

    def dot(a, c):
        return np.sum(a * c, axis=-1)

    scale = _cross_scale(b)
    vals = []
    for v, f, vn, fn in cross_stacks(b):
        s = dot(v, f) - dot(f, vn) + dot(vn, fn) - dot(fn, v)
        vals.append((np.abs(s) / scale).ravel())
    lh, lv = cross_labels(w)
    report = make_report("additive_cycle", np.concatenate(vals), lh + lv, np.inf)
    return pot, report


def _log_ratio(a, b):
    """|log(a / b)| with the branch cut handled: sign changes cost pi."""
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.abs(np.log((a / b).astype(complex)))


def solve_multiplicative_potential(bs, sigma0=1.0, anchor=None, tol=1e-12):
    """Potential with <u(d), u(d')> = sigma(d) sigma(d') on incident pairs.

    Same spanning-tree scheme as the additive case.  The cycle report holds
    per cross the modulus of the complex log of the two alternating
    products' ratio.
    """
    if sigma0 == 0:
        raise ValueError("sigma anchor must be nonzero")
    w = bs.window
    u = flat_values(bs)[:, :3]
    defined = np.all(np.isfinite(u), axis=1)
    root = None if anchor is None else flat_cell(w, anchor)
    root, order = spanning_tree(w, defined, root)
    sigma = np.full(u.shape[0], np.nan)
    sigma[root] = sigma0
    for child, parent in order:
        d = u[child] @ u[parent]
        if abs(d) < tol:
            raise RegularityError(
                f"incident planes {unflat_cell(w, child)} and {unflat_cell(w, parent)} are orthogonal"
            )
        sigma[child] = d / sigma[parent]
    pot = CellMap(w, *unflat_values(w, sigma))

    def dot(a, c):
        return np.sum(a[..., :3] * c[..., :3], axis=-1)

    vals = []
    for v, f, vn, fn in cross_stacks(bs):
        vals.append(_log_ratio(dot(v, f) * dot(vn, fn), dot(vn, f) * dot(v, fn)).ravel())
    lh, lv = cross_labels(w)
    report = make_report("multiplicative_cycle", np.concatenate(vals), lh + lv, np.inf)
    return pot, report


# ---------------------------------------------------------------------------
# Moebius side


def moebius_coordinates(points, rho):
    points = np.asarray(points, dtype=float)
    rho = np.asarray(rho, dtype=float)[..., None]
    return np.concatenate([points, rho - 0.5, rho + 0.5], axis=-1)


@dataclass
class MoebiusLift:
    base: Binet
    rho: CellMap
    points: Binet
    cycle: object
    polarity: object

    @property
    def cycle_residual(self):
        return self.cycle.max_residual

    @property
    def residual(self):
        return self.polarity.max_residual


def build_moebius_lift(b, rho0=0.0, anchor=None, tol=1e-9):
    """Moebius lift without the existence gate (used for diagnostics)."""
    if b.homogeneous:
        raise ValueError("the Moebius lift takes a Euclidean binet")
    rho, cycle = solve_additive_potential(b, rho0, anchor)
    pts = Binet(b.window, moebius_coordinates(b.vertex, rho.vertex), moebius_coordinates(b.face, rho.face), "Moebius")
    return MoebiusLift(b, rho, pts, cycle, check_polar_binet(pts, MOEBIUS, tol))


def moebius_lift(b, rho0=0.0, anchor=None, tol=1e-9):
    """Polar lift into the Moebius quadric's ambient space.

    ``rho0`` is the potential at the anchor (default the smallest vertex);
    changing it shifts vertex potentials up and face potentials down.  The
    lift exists iff every incident pair of the tree-built lift is polar;
    otherwise LiftError names the worst pair.
    """
    lift = build_moebius_lift(b, rho0, anchor, tol)
    if not lift.polarity.passed:
        raise LiftError(
            f"no Moebius lift: polarity residual {lift.residual:.3g} at {lift.polarity.worst} "
            f"(worst cycle {lift.cycle.worst})",
            lift.polarity.worst,
            lift.residual,
            lift,
        )
    return lift


def project_moebius(x):
    """Euclidean point (x1, x2, x3) / (x5 - x4); vectorised over the last axis."""
    x = np.asarray(x, dtype=float)
    w = x[..., 4] - x[..., 3]
    scale = np.linalg.norm(x, axis=-1)
    if np.any(np.abs(w) <= 1e-14 * scale):
        raise PointAtInfinityError("lift point lies in the polar hyperplane of the point at infinity")
    return x[..., :3] / w[..., None]


def project_moebius_binet(lift_points):
    """Project a Moebius-ambient binet back to E3; NaN cells stay NaN."""

    def go(x):
        with np.errstate(invalid="ignore", divide="ignore"):
            return x[..., :3] / (x[..., 4] - x[..., 3])[..., None]

    return Binet(lift_points.window, go(lift_points.vertex), go(lift_points.face))


@dataclass(frozen=True)
class SphereDecoding:
    center: np.ndarray
    r_squared: float

    @property
    def imaginary(self):
        return self.r_squared < 0

    @property
    def radius(self):
        """Radius of the real representative (|r^2| under the root)."""
        return float(np.sqrt(abs(self.r_squared)))


def sphere_from_lift(x):
    """Centre and squared radius of the sphere encoded by a Moebius point."""
    x = np.asarray(x, dtype=float)
    d = x[3] - x[4]  # 2 <x, e_inf>
    if abs(d) <= 1e-14 * np.linalg.norm(x):
        raise PointAtInfinityError("point is polar to infinity: it encodes a plane, not a sphere")
    return SphereDecoding(x[:3] / -d, float(inner(MOEBIUS, x, x) / d**2))


def sphere_to_lift(center, r_squared):
    c = np.asarray(center, dtype=float)
    return moebius_coordinates(c, 0.5 * (c @ c - r_squared))


def spheres_from_lifts(x):
    """Vectorised decoding: (centres, r^2) with NaN where undefined."""
    x = np.asarray(x, dtype=float)
    d = x[..., 3] - x[..., 4]
    with np.errstate(invalid="ignore", divide="ignore"):
        return x[..., :3] / -d[..., None], inner(MOEBIUS, x, x) / d**2


def radical_plane(s1, s2):
    """Plane of points with equal power with respect to both spheres, as [u, h]."""
    c1, c2 = np.asarray(s1.center), np.asarray(s2.center)
    if np.allclose(c1, c2, rtol=0, atol=1e-14):
        raise RegularityError("concentric spheres have no radical plane")
    rhs = (c2 @ c2 - s2.r_squared) - (c1 @ c1 - s1.r_squared)
    return plane_from_equation(2.0 * (c2 - c1), -rhs)


# ---------------------------------------------------------------------------
# Laguerre side


def unit_normals(bs):
    """Planes rescaled to unit normals with the coherent orientation gauge."""

    def unit(a):
        with np.errstate(invalid="ignore", divide="ignore"):
            return a / np.linalg.norm(a[..., :3], axis=-1, keepdims=True)

    return orient_coherently(BiStarNet(bs.window, unit(bs.vertex), unit(bs.face)))


@dataclass
class NormalBinet:
    points: Binet
    sigma: CellMap
    cycle: object
    polarity: object
    conjugacy: object


def normal_binet(bs, sigma0=1.0, anchor=None, tol=1e-9):
    """n(d) = u(d) / sigma(d), polar to itself across the unit sphere."""
    bs = unit_normals(bs)
    sigma, cycle = solve_multiplicative_potential(bs, sigma0, anchor)
    with np.errstate(invalid="ignore"):
        pts = Binet(bs.window, bs.vertex[..., :3] / sigma.vertex[..., None], bs.face[..., :3] / sigma.face[..., None])
    hom = Binet(
        bs.window,
        np.concatenate([pts.vertex, np.ones(pts.vertex.shape[:-1] + (1,))], axis=-1),
        np.concatenate([pts.face, np.ones(pts.face.shape[:-1] + (1,))], axis=-1),
        "UnitSphere",
    )
    polarity = check_polar_binet(hom, UNIT_SPHERE, tol)
    if not polarity.passed:
        raise LiftError(f"no normal binet: polarity residual {polarity.max_residual:.3g}", polarity.worst, polarity.max_residual)
    return NormalBinet(pts, sigma, cycle, polarity, check_conjugate(pts, tol))


def laguerre_coordinates(planes, sigma):
    planes = np.asarray(planes, dtype=float)
    sigma = np.asarray(sigma, dtype=float)[..., None]
    return np.concatenate([planes[..., :3], sigma, planes[..., 3:4]], axis=-1)


@dataclass
class LaguerreLift:
    base: BiStarNet
    sigma: CellMap
    points: Binet
    cycle: object
    polarity: object

    @property
    def cycle_residual(self):
        return self.cycle.max_residual

    @property
    def residual(self):
        return self.polarity.max_residual

    def project(self):
        """Planes [u, h] recovered by dropping the sigma coordinate."""
        p = self.points
        return BiStarNet(p.window, p.vertex[..., [0, 1, 2, 4]], p.face[..., [0, 1, 2, 4]])


def laguerre_lift(bs, sigma0=1.0, anchor=None, tol=1e-9):
    """Polar lift of an oriented bi*net for the form (+++-0)."""
    bs = unit_normals(bs)
    sigma, cycle = solve_multiplicative_potential(bs, sigma0, anchor)
    pts = Binet(bs.window, laguerre_coordinates(bs.vertex, sigma.vertex), laguerre_coordinates(bs.face, sigma.face), "Blaschke")
    polarity = check_polar_binet(pts, BLASCHKE, tol)
    lift = LaguerreLift(bs, sigma, pts, cycle, polarity)
    if not polarity.passed:
        raise LiftError(
            f"no Laguerre lift: polarity residual {polarity.max_residual:.3g} at {polarity.worst}",
            polarity.worst,
            polarity.max_residual,
            lift,
        )
    return lift


# ---------------------------------------------------------------------------
# Lie side


def embed_moebius_to_lie(x):
    x = np.asarray(x, dtype=float)
    return np.concatenate([x, np.zeros(x.shape[:-1] + (1,))], axis=-1)


def embed_laguerre_to_lie(y):
    """[u, sigma, h] -> u - 2 h e_inf + sigma e6 = (u, -h, -h, sigma)."""
    y = np.asarray(y, dtype=float)
    u, sigma, h = y[..., :3], y[..., 3:4], y[..., 4:5]
    return np.concatenate([u, -h, -h, sigma], axis=-1)


def lie_to_laguerre(x):
    """Inverse of the plane embedding on points of the hyperplane x4 = x5."""
    x = np.asarray(x, dtype=float)
    return np.concatenate([x[..., :3], x[..., 5:6], -x[..., 3:4]], axis=-1)


class LineBicongruence(CellMap):
    """Lines of RP^5 stored as spanning pairs: arrays (..., 2, 6), Moebius point first."""


def lie_lines(mlift, llift):
    w = mlift.points.window
    vq, fq = embed_moebius_to_lie(mlift.points.vertex), embed_moebius_to_lie(mlift.points.face)
    vb, fb = embed_laguerre_to_lie(llift.points.vertex), embed_laguerre_to_lie(llift.points.face)
    return LineBicongruence(w, np.stack([vq, vb], axis=-2), np.stack([fq, fb], axis=-2))


def check_line_polarity(lines, tol=1e-9):
    """All four inner products between spanning points of incident lines."""
    a, b = incident_pair_stacks(lines)
    a, b = unit_rows(a), unit_rows(b)
    vals = np.zeros(a.shape[:-2])
    with np.errstate(invalid="ignore"):
        for i in range(2):
            for j in range(2):
                vals = np.fmax(vals, np.abs(inner(LIE, a[..., i, :], b[..., j, :])))
        bad = ~np.all(np.isfinite(a), axis=(-2, -1)) | ~np.all(np.isfinite(b), axis=(-2, -1))
    vals = np.where(bad, np.nan, vals)
    return make_report("line_polarity", vals.ravel(), incident_pair_labels(lines.window), tol)


def _adjacent_stacks(arr):
    """Pairs of lattice neighbours along both axes, flattened."""
    a = np.concatenate([arr[:-1].reshape((-1,) + arr.shape[2:]), arr[:, :-1].reshape((-1,) + arr.shape[2:])])
    b = np.concatenate([arr[1:].reshape((-1,) + arr.shape[2:]), arr[:, 1:].reshape((-1,) + arr.shape[2:])])
    return a, b


def adjacent_labels(window):
    """Same-kind neighbour pairs in the order of the adjacent stacks."""
    m, n = window.shape
    i0, j0 = window.origin
    out = []
    for make, mm, nn in ((Vertex, m, n), (Face, m - 1, n - 1)):
        out += [(make(i0 + i, j0 + j), make(i0 + i + 1, j0 + j)) for i in range(mm - 1) for j in range(nn)]
        out += [(make(i0 + i, j0 + j), make(i0 + i, j0 + j + 1)) for i in range(mm) for j in range(nn - 1)]
    return out


def check_adjacent_lines_meet(lines, tol=1e-9):
    """Fourth over first singular value of the four spanning vectors of neighbouring lines."""
    parts = []
    for arr in (lines.vertex, lines.face):
        a, b = _adjacent_stacks(arr)
        stack = unit_rows(np.concatenate([a, b], axis=-2))
        ok = np.all(np.isfinite(stack), axis=(-2, -1))
        vals = np.full(stack.shape[0], np.nan)
        if np.any(ok):
            s = np.linalg.svd(stack[ok], compute_uv=False)
            vals[ok] = s[:, 3] / s[:, 0]
        parts.append(vals)
    return make_report("adjacent_lines_meet", np.concatenate(parts), adjacent_labels(lines.window), tol)


@dataclass
class LieLift:
    base: Binet
    moebius: MoebiusLift
    laguerre: LaguerreLift
    lines: LineBicongruence
    polarity: object
    meets: object

    @property
    def passed(self):
        return self.polarity.passed and self.meets.passed


def canonical_anchors(b):
    """Anchors giving point spheres at the first vertex and sigma = 1 at the first defined plane."""
    v0 = b[Vertex(*b.window.origin)]
    return 0.5 * float(v0 @ v0), 1.0


def lie_lift(b, rho0=0.0, sigma0=1.0, tol=1e-9):
    """Lines spanned by the Moebius and Laguerre lift points of each cell.

    Needs a principal binet; otherwise the error says which of conjugacy and
    orthogonality failed.  Boundary vertices carry no plane, hence no line.
    """
    conj = check_conjugate(b, tol)
    orth = check_orthogonal(b, tol)
    if not (conj.passed and orth.passed):
        which = " and ".join(n for n, r in (("conjugacy", conj), ("orthogonality", orth)) if not r.passed)
        worst = conj.worst if not conj.passed else orth.worst
        raise LiftError(f"no Lie lift: {which} fails (worst {worst})", worst, max(conj.max_residual, orth.max_residual))
    mlift = moebius_lift(b, rho0, tol=tol)
    llift = laguerre_lift(box_planes(b, tol), sigma0, tol=tol)
    lines = lie_lines(mlift, llift)
    return LieLift(b, mlift, llift, lines, check_line_polarity(lines, tol), check_adjacent_lines_meet(lines, tol))


@dataclass(frozen=True)
class EuclideanLine:
    point: np.ndarray
    direction: np.ndarray

    def distance_to(self, x):
        d = np.asarray(x, dtype=float) - self.point
        return float(np.linalg.norm(d - (d @ self.direction) * self.direction))


def _to_projective3(x):
    x = np.asarray(x, dtype=float)
    return np.concatenate([x[..., :3], (x[..., 4] - x[..., 3])[..., None]], axis=-1)


def project_lie_to_normal_line(pair, tol=1e-12):
    """Euclidean line obtained from a Lie line by (x1, x2, x3, x5 - x4)."""
    p, q = _to_projective3(pair[0]), _to_projective3(pair[1])
    if abs(p[3]) < abs(q[3]):
        p, q = q, p
    direction = p[3] * q[:3] - q[3] * p[:3]
    nd = np.linalg.norm(direction)
    if abs(p[3]) <= tol * np.linalg.norm(p) or nd <= tol * np.linalg.norm(p) * np.linalg.norm(q):
        raise DegenerateError("line projects to a line at infinity or a point")
    direction = direction / nd
    if direction[np.argmax(np.abs(direction) > 1e-12)] < 0:
        direction = -direction
    return EuclideanLine(p[:3] / p[3], direction)


def lie_sections(lines):
    """Points (section with x6 = 0) and planes (section with the polar of B) of each line.

    Returns a Euclidean binet and a bi*net; undefined lines give NaN.
    """

    def section(arr, normal):
        a, b = arr[..., 0, :], arr[..., 1, :]
        ca = inner(LIE, a, normal)[..., None]
        cb = inner(LIE, b, normal)[..., None]
        return cb * a - ca * b

    def points(arr):
        x = section(arr, M_LIE)
        with np.errstate(invalid="ignore", divide="ignore"):
            return x[..., :3] / (x[..., 4] - x[..., 3])[..., None]

    def planes(arr):
        y = lie_to_laguerre(section(arr, B_LIE))
        with np.errstate(invalid="ignore", divide="ignore"):
            return y[..., [0, 1, 2, 4]] / np.linalg.norm(y[..., :3], axis=-1, keepdims=True)

    w = lines.window
    return Binet(w, points(lines.vertex), points(lines.face)), orient_coherently(
        BiStarNet(w, planes(lines.vertex), planes(lines.face))
    )


def transform_lines(lines, t):
    return LineBicongruence(lines.window, t.apply(lines.vertex), t.apply(lines.face))


def transform_moebius_points(lift_points, t):
    return Binet(lift_points.window, t.apply(lift_points.vertex), t.apply(lift_points.face), lift_points.ambient)


def isotropy_residuals(lines):
    """Frobenius norm of the Lie Gram matrix of each line's unit spanning pair."""
    arr = unit_rows(lines.vertex)
    g = LIE.gram
    with np.errstate(invalid="ignore"):
        gram = np.einsum("...ik,kl,...jl->...ij", arr, g, arr)
    return np.linalg.norm(gram, axis=(-2, -1))


def quadric_residuals(points, form=MOEBIUS):
    """|<x, x>| on unit-normalised points of a cell map."""
    with np.errstate(invalid="ignore"):
        return np.abs(inner(form, unit_rows(points.vertex), unit_rows(points.vertex))), np.abs(
            inner(form, unit_rows(points.face), unit_rows(points.face))
        )


TRANSFORM_FIXED_POINTS = {"moebius": M_LIE, "laguerre": B_LIE, "lie": None}


@dataclass
class TransformedBinet:
    binet: Binet
    bistar: BiStarNet
    transform: object
    lift: LieLift


def transform_binet(b, kind="lie", seed=0, magnitude=0.3, rho0=None, sigma0=None, tol=1e-9):
    """Apply a random isometry of the Lie form through the Lie lift and project back.

    ``kind`` selects the subgroup: "moebius" fixes the point-sphere
    direction, "laguerre" fixes the plane direction, "lie" is unrestricted.
    Points come from the transformed lines; under a Moebius transformation
    the boundary vertices, which have no line, are carried along through
    their Moebius lift points.
    """
    if kind not in TRANSFORM_FIXED_POINTS:
        raise ValueError(f"unknown transformation kind {kind!r}")
    r0, s0 = canonical_anchors(b)
    lift = lie_lift(b, r0 if rho0 is None else rho0, s0 if sigma0 is None else sigma0, tol)
    t = random_form_isometry(LIE, seed, magnitude, fixed_point=TRANSFORM_FIXED_POINTS[kind])
    points, planes = lie_sections(transform_lines(lift.lines, t))
    if kind == "moebius":
        moved = t.apply(embed_moebius_to_lie(lift.moebius.points.vertex))
        with np.errstate(invalid="ignore", divide="ignore"):
            vert = moved[..., :3] / (moved[..., 4] - moved[..., 3])[..., None]
        points = Binet(points.window, np.where(np.isfinite(points.vertex), points.vertex, vert), points.face)
    return TransformedBinet(points, planes, t, lift)

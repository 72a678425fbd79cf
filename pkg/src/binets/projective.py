"""Homogeneous-coordinate linear algebra.

Points, subspaces, joins, meets and polarity with respect to diagonal
quadratic forms.  Subspaces are stored as orthonormal row bases; meets go
through the null space of stacked annihilators.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

RANK_TOL = 1e-9


class DegenerateError(ValueError):
    """Raised when a construction hits a rank-deficient configuration."""


def normalize(x):
    """Scale to unit norm with the first nonzero coordinate positive.

    Works on a single vector or on the last axis of a stack of vectors.
    """
    x = np.asarray(x, dtype=float)
    norms = np.linalg.norm(x, axis=-1, keepdims=True)
    if np.any(norms == 0):
        raise DegenerateError("zero vector has no projective class")
    y = x / norms
    # sign of the first entry that is clearly nonzero
    nz = np.abs(y) > 1e-12
    first = np.argmax(nz, axis=-1)
    lead = np.take_along_axis(y, first[..., None], axis=-1)
    return y * np.where(lead < 0, -1.0, 1.0)


def unit_rows(x):
    """Scale each vector on the last axis to unit norm, keeping its sign."""
    x = np.asarray(x, dtype=float)
    return x / np.linalg.norm(x, axis=-1, keepdims=True)


def singular_values(m):
    return np.linalg.svd(np.atleast_2d(m), compute_uv=False)


def numerical_rank(m, tol=RANK_TOL):
    m = np.atleast_2d(np.asarray(m, dtype=float))
    if m.size == 0:
        return 0
    s = singular_values(m)
    if s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


def row_space(m, tol=RANK_TOL):
    """Orthonormal basis (rows) of the row space of ``m``."""
    m = np.atleast_2d(np.asarray(m, dtype=float))
    if m.size == 0:
        return np.zeros((0, m.shape[-1]))
    _, s, vt = np.linalg.svd(m, full_matrices=False)
    if s[0] == 0:
        return np.zeros((0, m.shape[1]))
    r = int(np.sum(s > tol * s[0]))
    return vt[:r]


def null_space(m, tol=RANK_TOL):
    """Orthonormal basis (rows) of {x : m @ x = 0}."""
    m = np.atleast_2d(np.asarray(m, dtype=float))
    n = m.shape[1]
    if m.shape[0] == 0:
        return np.eye(n)
    _, s, vt = np.linalg.svd(m, full_matrices=True)
    if s.size == 0 or s[0] == 0:
        return np.eye(n)
    r = int(np.sum(s > tol * s[0]))
    return vt[r:]


def smallest_right_vector(m):
    """Least-squares null direction of ``m`` plus its relative singular gap.

    Returns ``(vector, s_min / s_max, s_next / s_max)``.  A small second
    value means an (almost) exact null vector, a small third value means
    the null space is more than one dimensional.
    """
    m = np.atleast_2d(np.asarray(m, dtype=float))
    _, s, vt = np.linalg.svd(m, full_matrices=True)
    n = m.shape[1]
    full = np.zeros(n)
    full[: s.size] = s
    top = full[0] if full[0] > 0 else 1.0
    return vt[-1], full[-1] / top, full[-2] / top


# ---------------------------------------------------------------------------
# forms


_SIGNATURES = {
    "Euclid3": (1.0, 1.0, 1.0),
    "Moebius": (1.0, 1.0, 1.0, 1.0, -1.0),
    "Blaschke": (1.0, 1.0, 1.0, -1.0, 0.0),
    "Lie": (1.0, 1.0, 1.0, 1.0, -1.0, -1.0),
    "UnitSphere": (1.0, 1.0, 1.0, -1.0),
}


@dataclass(frozen=True)
class QuadricForm:
    """Diagonal symmetric bilinear form, named after the geometry it models."""

    diagonal: tuple
    name: str

    def __post_init__(self):
        if self.name not in _SIGNATURES:
            raise ValueError(f"unknown form name {self.name!r}")
        if tuple(float(d) for d in self.diagonal) != _SIGNATURES[self.name]:
            raise ValueError(f"diagonal {self.diagonal} does not match {self.name}")

    @classmethod
    def named(cls, name):
        return cls(_SIGNATURES[name], name)

    @property
    def size(self):
        return len(self.diagonal)

    @property
    def gram(self):
        return np.diag(np.asarray(self.diagonal, dtype=float))

    @property
    def degenerate(self):
        return 0.0 in self.diagonal


EUCLID3 = QuadricForm.named("Euclid3")
MOEBIUS = QuadricForm.named("Moebius")
BLASCHKE = QuadricForm.named("Blaschke")
LIE = QuadricForm.named("Lie")
UNIT_SPHERE = QuadricForm.named("UnitSphere")


def _coords(x):
    return x.coords if isinstance(x, HomVector) else np.asarray(x, dtype=float)


def inner(form, x, y):
    """Bilinear form evaluated on (stacks of) coordinate vectors."""
    x, y = _coords(x), _coords(y)
    d = np.asarray(form.diagonal, dtype=float)
    if x.shape[-1] != d.size or y.shape[-1] != d.size:
        raise ValueError(f"{form.name} form expects length {d.size}, got {x.shape[-1]} and {y.shape[-1]}")
    return np.sum(x * d * y, axis=-1)


# ---------------------------------------------------------------------------
# points and subspaces


@dataclass(frozen=True, eq=False)
class HomVector:
    """A projective point, stored as a unit vector with positive leading entry."""

    coords: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coords", normalize(np.asarray(self.coords, dtype=float).ravel()))

    @property
    def ambient_dim(self):
        return self.coords.size - 1

    def same_point(self, other, tol=1e-12):
        other = other if isinstance(other, HomVector) else HomVector(other)
        # 2x2 minors of the stacked pair vanish iff the vectors are proportional
        m = np.outer(self.coords, other.coords)
        return float(np.max(np.abs(m - m.T))) <= tol

    def __eq__(self, other):
        if not isinstance(other, HomVector) or other.coords.size != self.coords.size:
            return NotImplemented
        return self.same_point(other)

    def __hash__(self):
        return hash(tuple(np.round(self.coords, 9)))

    def __repr__(self):
        return f"HomVector({np.array2string(self.coords, precision=6)})"


def _canonical_basis(rows, tol):
    """Deterministic orthonormal basis of a row space.

    The orthogonal projector onto the space is unique; the basis is obtained
    by Gram-Schmidt on the first independent rows of that projector.
    """
    if rows.shape[0] == 0:
        return rows
    proj = rows.T @ rows
    basis = []
    for r in proj:
        v = r.copy()
        for b in basis:
            v -= (v @ b) * b
        nv = np.linalg.norm(v)
        if nv > 1e-6:
            basis.append(v / nv)
        if len(basis) == rows.shape[0]:
            break
    return np.array(basis)


class ProjSubspace:
    """A projective subspace of RP^n given by an orthonormal row basis.

    ``dim`` is the projective dimension: -1 for the empty subspace, 0 for a
    point, 1 for a line and so on.
    """

    __slots__ = ("basis", "ambient_dim")

    def __init__(self, vectors, ambient_dim=None, tol=RANK_TOL):
        vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
        if ambient_dim is None:
            ambient_dim = vectors.shape[1] - 1
        if vectors.size and vectors.shape[1] != ambient_dim + 1:
            raise ValueError("basis length does not match ambient dimension")
        rows = row_space(vectors, tol) if vectors.size else np.zeros((0, ambient_dim + 1))
        self.basis = _canonical_basis(rows, tol)
        self.ambient_dim = ambient_dim

    @classmethod
    def point(cls, x):
        return cls(np.atleast_2d(_coords(x)))

    @classmethod
    def empty(cls, ambient_dim):
        return cls(np.zeros((0, ambient_dim + 1)), ambient_dim)

    @classmethod
    def whole(cls, ambient_dim):
        return cls(np.eye(ambient_dim + 1), ambient_dim)

    @property
    def dim(self):
        return self.basis.shape[0] - 1

    @property
    def projector(self):
        return self.basis.T @ self.basis

    def annihilator(self, tol=RANK_TOL):
        """Rows spanning the linear forms that vanish on the subspace."""
        if self.basis.shape[0] == 0:
            return np.eye(self.ambient_dim + 1)
        return null_space(self.basis, tol)

    def contains(self, x, tol=1e-9):
        x = normalize(_coords(x))
        return float(np.linalg.norm(x - self.projector @ x)) <= tol

    def as_point(self):
        if self.dim != 0:
            raise DegenerateError(f"subspace has dimension {self.dim}, not a point")
        return HomVector(self.basis[0])

    def __eq__(self, other):
        if not isinstance(other, ProjSubspace):
            return NotImplemented
        if other.ambient_dim != self.ambient_dim or other.dim != self.dim:
            return False
        return float(np.max(np.abs(self.projector - other.projector), initial=0.0)) < 1e-8

    def __repr__(self):
        return f"ProjSubspace(dim={self.dim}, ambient={self.ambient_dim})"


def _check_same_ambient(a, b):
    if a.ambient_dim != b.ambient_dim:
        raise ValueError(f"ambient dimensions differ: {a.ambient_dim} vs {b.ambient_dim}")


def join(a, b, tol=RANK_TOL):
    """Smallest subspace containing both arguments."""
    _check_same_ambient(a, b)
    return ProjSubspace(np.vstack([a.basis, b.basis]), a.ambient_dim, tol)


def meet(a, b, tol=RANK_TOL):
    """Largest subspace contained in both arguments (possibly empty)."""
    _check_same_ambient(a, b)
    ann = np.vstack([a.annihilator(tol), b.annihilator(tol)])
    return ProjSubspace(null_space(ann, tol), a.ambient_dim, tol)


def join_all(parts, tol=RANK_TOL):
    parts = list(parts)
    return ProjSubspace(np.vstack([p.basis for p in parts]), parts[0].ambient_dim, tol)


def meet_all(parts, tol=RANK_TOL):
    parts = list(parts)
    ann = np.vstack([p.annihilator(tol) for p in parts])
    return ProjSubspace(null_space(ann, tol), parts[0].ambient_dim, tol)


def polar(form, s, tol=RANK_TOL):
    """Polar subspace {x : <x, y> = 0 for all y in s}.

    For the degenerate Blaschke form this is the annihilator under the form,
    and taking the polar twice enlarges the subspace by the kernel.
    """
    if s.ambient_dim + 1 != form.size:
        raise ValueError(f"{form.name} form does not act on RP^{s.ambient_dim}")
    if s.basis.shape[0] == 0:
        return ProjSubspace.whole(s.ambient_dim)
    return ProjSubspace(null_space(s.basis * np.asarray(form.diagonal), tol), s.ambient_dim, tol)


# ---------------------------------------------------------------------------
# transformations


@dataclass(frozen=True, eq=False)
class ProjTransform:
    matrix: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("transform matrix must be square")
        s = singular_values(m)
        if s[-1] <= 1e-12 * s[0]:
            raise DegenerateError("transform matrix is singular")
        object.__setattr__(self, "matrix", m)

    def __matmul__(self, other):
        return ProjTransform(self.matrix @ other.matrix)

    def apply(self, x):
        """Apply to a stack of coordinate vectors (last axis)."""
        return np.asarray(x, dtype=float) @ self.matrix.T

    def form_residual(self, form):
        """Max-abs entry of T^T G T - lambda G with the best scalar lambda."""
        g = form.gram
        tgt = self.matrix.T @ g @ self.matrix
        lam = np.sum(tgt * g) / np.sum(g * g)
        return float(np.max(np.abs(tgt - lam * g)))


def apply_transform(t, s):
    return ProjSubspace(t.apply(s.basis), s.ambient_dim)


def random_form_isometry(form, seed, magnitude=0.3, fixed_point=None, max_retries=30):
    """Seeded isometry of a nondegenerate form via the Cayley transform.

    A random generator ``A`` with ``A^T G + G A = 0`` is scaled by
    ``magnitude`` and mapped to ``(I - A)^-1 (I + A)``.  If ``fixed_point`` is
    given the generator also annihilates it, so the isometry fixes that
    point.  Near a Cayley pole the magnitude is halved and the retry is
    recorded in ``diagnostics``.
    """
    if form.degenerate:
        raise ValueError(f"{form.name} form is degenerate; no Cayley parametrisation")
    n = form.size
    g = form.gram
    rng = np.random.default_rng(seed)
    raw = rng.normal(size=(n, n))
    skew = raw - raw.T
    if fixed_point is not None:
        p = np.asarray(fixed_point, dtype=float)
        # A p = G S p vanishes iff S p = 0: restrict S to the complement of p
        proj = np.eye(n) - np.outer(p, p) / (p @ p)
        skew = proj @ skew @ proj
    gen = g @ skew  # G^{-1} = G for signature forms
    eye = np.eye(n)
    mag = float(magnitude)
    retries = 0
    while True:
        a = mag * gen
        left = eye - a
        s = singular_values(left)
        if s[-1] > 1e-6 * s[0]:
            break
        retries += 1
        if retries > max_retries:
            raise DegenerateError("Cayley transform kept hitting a pole")
        mag *= 0.5
    mat = np.linalg.solve(left, eye + a)
    return ProjTransform(mat, {"form": form.name, "seed": seed, "magnitude": mag, "retries": retries})

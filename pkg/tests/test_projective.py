import numpy as np
import pytest
from hypothesis import given, strategies as st

from binets.projective import (
    BLASCHKE,
    EUCLID3,
    LIE,
    MOEBIUS,
    UNIT_SPHERE,
    DegenerateError,
    HomVector,
    ProjSubspace,
    ProjTransform,
    QuadricForm,
    apply_transform,
    inner,
    join,
    meet,
    normalize,
    polar,
    random_form_isometry,
)
from conftest import gauss_rank

seeds = st.integers(0, 2**31 - 1)


def rand_subspace(rng, ambient, k):
    return ProjSubspace(rng.normal(size=(k + 1, ambient + 1)))


def test_form_signatures():
    assert MOEBIUS.diagonal == (1.0, 1.0, 1.0, 1.0, -1.0)
    assert BLASCHKE.diagonal == (1.0, 1.0, 1.0, -1.0, 0.0) and BLASCHKE.degenerate
    assert LIE.diagonal == (1.0, 1.0, 1.0, 1.0, -1.0, -1.0)
    with pytest.raises(ValueError):
        QuadricForm((1, 1, 1, 1, 1), "Moebius")


def test_inner_examples():
    b = np.array([0, 0, 0, 1, 1.0])
    assert inner(MOEBIUS, b, b) == 0.0
    for form in (EUCLID3, MOEBIUS, LIE, UNIT_SPHERE):
        for i, d in enumerate(form.diagonal):
            if d == 1:
                e = np.eye(form.size)[i]
                assert inner(form, e, e) == 1.0
    x = np.array([0, 0, 1, 0, 0, 1.0])
    assert inner(LIE, x, x) == 0.0
    with pytest.raises(ValueError):
        inner(MOEBIUS, np.ones(4), np.ones(5))


@given(seeds)
def test_inner_bilinear_symmetric(seed):
    rng = np.random.default_rng(seed)
    x, y, z = (normalize(rng.normal(size=6)) for _ in range(3))
    assert abs(inner(LIE, x, y) - inner(LIE, y, x)) < 1e-15
    assert abs(inner(LIE, x + y, z) - inner(LIE, x, z) - inner(LIE, y, z)) < 1e-12


def test_homvector_normalisation_and_equality():
    a = HomVector([-2.0, 4.0, 0.0])
    assert np.allclose(a.coords, np.array([1, -2, 0]) / np.sqrt(5))
    assert a == HomVector([3.0, -6.0, 0.0])
    assert a != HomVector([1.0, 2.0, 0.0])
    with pytest.raises(DegenerateError):
        HomVector(np.zeros(3))


def test_join_examples(rng):
    e1, e2 = ProjSubspace.point(np.eye(5)[0]), ProjSubspace.point(np.eye(5)[1])
    line = join(e1, e2)
    assert line.dim == 1 and line.contains(np.eye(5)[0] + 3 * np.eye(5)[1])
    assert join(line, line) == line
    pts = rng.normal(size=(3, 5))
    plane = join(join(ProjSubspace.point(pts[0]), ProjSubspace.point(pts[1])), ProjSubspace.point(pts[2]))
    assert plane.dim + 1 == gauss_rank(pts) == 3


def test_meet_examples(rng):
    # planes x = 1 and y = 1 in the affine chart w = 1 of RP^3, as subspaces
    px = ProjSubspace(np.array([[1, 0, 0, 1.0], [1, 1, 0, 1.0], [1, 0, 1, 1.0]]))
    py = ProjSubspace(np.array([[0, 1, 0, 1.0], [1, 1, 0, 1.0], [0, 1, 1, 1.0]]))
    m = meet(px, py)
    assert m.dim == 1
    for t in (-2.0, 0.0, 5.0):
        assert m.contains([1, 1, t, 1])
    a, b = rand_subspace(rng, 3, 1), rand_subspace(rng, 3, 1)
    assert meet(a, b).dim == -1
    ann = np.vstack([a.annihilator(), b.annihilator()])
    assert gauss_rank(ann) == 4
    assert meet(a, a) == a


@given(seeds, st.integers(0, 3), st.integers(0, 3))
def test_join_meet_dimension_formula(seed, k, l):
    rng = np.random.default_rng(seed)
    a, b = rand_subspace(rng, 4, k), rand_subspace(rng, 4, l)
    j, m = join(a, b), meet(a, b)
    # general position: join is as large as possible
    if j.dim == min(4, k + l + 1):
        assert j.dim + m.dim == a.dim + b.dim


@given(seeds, st.integers(0, 3))
def test_double_polar_moebius(seed, k):
    rng = np.random.default_rng(seed)
    s = rand_subspace(rng, 4, k)
    p = polar(MOEBIUS, s)
    assert s.dim + p.dim == 3
    assert polar(MOEBIUS, p) == s


@given(seeds, st.integers(0, 4))
def test_double_polar_lie(seed, k):
    rng = np.random.default_rng(seed)
    s = rand_subspace(rng, 5, k)
    assert polar(LIE, polar(LIE, s)) == s


def test_polar_examples(rng):
    b = ProjSubspace.point([0, 0, 0, 1, 1.0])
    h = polar(MOEBIUS, b)
    assert h.dim == 3
    for v in h.basis:
        assert abs(v[3] - v[4]) < 1e-12
    m = polar(LIE, ProjSubspace.point(np.eye(6)[5]))
    assert m.dim == 4 and np.allclose(m.basis[:, 5], 0)
    x = rng.normal(size=5)
    for v in polar(MOEBIUS, ProjSubspace.point(x)).basis:
        assert abs(inner(MOEBIUS, v, x)) < 1e-12


def test_blaschke_double_polar_grows_by_kernel():
    s = ProjSubspace.point([1, 0, 0, 0, 0.0])
    twice = polar(BLASCHKE, polar(BLASCHKE, s))
    assert twice.dim == 1 and twice.contains([0, 0, 0, 0, 1.0])


def test_apply_transform_examples(rng):
    s = rand_subspace(rng, 3, 1)
    assert apply_transform(ProjTransform(np.eye(4)), s) == s
    t = random_form_isometry(MOEBIUS, 3)
    x = rng.normal(size=5)
    y = polar(MOEBIUS, ProjSubspace.point(x)).basis[0]
    tx, ty = t.apply(x), t.apply(y)
    assert abs(inner(MOEBIUS, tx, ty)) < 1e-12 * np.linalg.norm(tx) * np.linalg.norm(ty)
    c, s_ = np.cos(0.7), np.sin(0.7)
    rot = np.eye(4)
    rot[:2, :2] = [[c, -s_], [s_, c]]
    plane = ProjSubspace(np.array([[0, 0, 0, 1.0], [1, 0, 0, 1], [0, 0, 1, 1]]))  # y = 0
    image = apply_transform(ProjTransform(rot), plane)
    assert image.contains([-s_, c, 0, 0]) is False
    assert image.contains([c, s_, 0, 0]) and image.contains([0, 0, 1, 1])


def test_random_isometry_examples():
    assert np.allclose(random_form_isometry(MOEBIUS, 1, magnitude=0.0).matrix, np.eye(5))
    t = random_form_isometry(MOEBIUS, 42)
    g = MOEBIUS.gram
    assert np.max(np.abs(t.matrix.T @ g @ t.matrix - g)) < 1e-12
    u = random_form_isometry(MOEBIUS, 43)
    assert (t @ u).form_residual(MOEBIUS) < 1e-12
    assert np.array_equal(random_form_isometry(LIE, 5).matrix, random_form_isometry(LIE, 5).matrix)
    with pytest.raises(ValueError):
        random_form_isometry(BLASCHKE, 0)


@given(seeds, st.floats(0.0, 3.0))
def test_random_isometry_preserves_form(seed, mag):
    t = random_form_isometry(LIE, seed, mag)
    assert t.form_residual(LIE) < 1e-10 * np.linalg.norm(t.matrix) ** 2


def test_fixed_point_isometry():
    p = np.eye(6)[5]
    t = random_form_isometry(LIE, 9, 0.5, fixed_point=p)
    assert np.allclose(t.apply(p), p, atol=1e-13)
    assert t.form_residual(LIE) < 1e-12


@given(seeds)
def test_isometry_preserves_sign_class(seed):
    rng = np.random.default_rng(seed)
    t = random_form_isometry(MOEBIUS, seed)
    x = rng.normal(size=5)
    q = inner(MOEBIUS, x, x)
    if abs(q) > 1e-6:
        assert np.sign(inner(MOEBIUS, t.apply(x), t.apply(x))) == np.sign(q)

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from binets.binet import (
    BiStarNet,
    Binet,
    NotConjugateError,
    apply_projective,
    apply_similarity,
    box_planes,
    box_star_points,
    check_bistar_orthogonal,
    check_conjugate,
    check_orthogonal,
    check_polar_binet,
    grid_binet,
    max_point_discrepancy,
    plane_from_equation,
)
from binets.constructors import generate_principal, revolution_binet, torus_profile
from binets.lattice import Face, Vertex, Window
from binets.lifts import moebius_lift
from binets.projective import MOEBIUS, UNIT_SPHERE, random_form_isometry

seeds = st.integers(0, 10_000)


def random_rotation(rng):
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    return q * np.sign(np.diag(r))


def near_identity_projective(rng, size=0.05):
    return np.eye(4) + size * rng.normal(size=(4, 4))


def single_cross(v, v_next, f, f_next):
    """2x3 window whose only cross is Vertex(0,1)-Vertex(1,1) with Face(0,0), Face(0,1)."""
    w = Window.grid(2, 3)
    vert = np.array([[[0, -3, 5], v, [0, 4, 5]], [[3, -3, 5], v_next, [3, 4, 5]]], dtype=float)
    face = np.array([[f, f_next]], dtype=float)
    return Binet(w, vert, face)


def test_grid_is_principal():
    g = grid_binet(5, 4)
    c, o = check_conjugate(g), check_orthogonal(g)
    assert c.max_residual == 0 and c.passed
    assert o.max_residual < 1e-15 and o.count == 3 * 3 + 4 * 2


def test_non_planar_quad():
    w = Window.grid(2, 2)
    vert = np.array([[[0, 0, 0], [0, 1, 0]], [[1, 0, 0], [1, 1, 1]]], dtype=float)
    b = Binet(w, vert, np.zeros((1, 1, 3)))
    rep = check_conjugate(b)
    quad = np.array([[0, 0, 0], [1, 0, 0], [1, 1, 1], [0, 1, 0]], dtype=float)
    volume = abs(np.linalg.det(quad[1:] - quad[0]))
    assert volume > 0.5
    assert rep.max_residual > 0.1 and not rep.passed and rep.worst == Face(0, 0)


def test_orthogonal_cross_examples():
    b = single_cross([0, 0, 0], [2, 0, 0], [1, -1, 0], [1, 1, 0])
    assert check_orthogonal(b).max_residual == 0
    b = single_cross([0, 0, 0], [2, 0, 0], [1, -1, 0], [1, 1, 1])
    assert check_orthogonal(b).max_residual == 0
    b = single_cross([0, 0, 0], [2, 0.1, 0], [1, -1, 0], [1, 1, 0])
    rep = check_orthogonal(b)
    expected = 0.2 / (np.hypot(2, 0.1) * 2.0)
    assert abs(rep.max_residual - expected) < 1e-15
    assert rep.worst.v == Vertex(0, 1)


def test_bistar_orthogonal_example():
    w = Window.grid(2, 3)
    s = 1 / np.sqrt(2)
    vert = np.full((2, 3, 4), np.nan)
    vert[0, 1] = [1, 0, 0, 0]
    vert[1, 1] = [0, 1, 0, 0]
    face = np.array([[[s, s, 0, 0], [0, 0, 1, 0]]])
    rep = check_bistar_orthogonal(BiStarNet(w, vert, face))
    assert rep.count == 1 and rep.max_residual < 1e-16


def test_principal_box_planes_are_orthogonal_and_perturbation_detected():
    b = generate_principal(3, 7, 7)
    bs = box_planes(b)
    assert check_bistar_orthogonal(bs).max_residual < 1e-9
    bad = bs.copy()
    u = bad.face[2, 2, :3] + np.array([1e-2, 0, 0])
    bad.face[2, 2] = plane_from_equation(u, bad.face[2, 2, 3])
    assert check_bistar_orthogonal(bad).max_residual > 1e-4


def test_box_planes_of_grid_and_revolution():
    bs = box_planes(grid_binet(4, 4))
    ok = np.isfinite(bs.face[..., 0])
    assert np.allclose(np.abs(bs.face[ok]), [0, 0, 1, 0])
    b = revolution_binet(torus_profile(6, 5))
    bs = box_planes(b, 1e-9)
    corners = [b.vertex[:-1, :-1], b.vertex[1:, :-1], b.vertex[1:, 1:], b.vertex[:-1, 1:]]
    for c in corners:
        dist = np.sum(c * bs.face[..., :3], axis=-1) + bs.face[..., 3]
        assert np.max(np.abs(dist)) < 1e-10


def test_box_star_points_example():
    w = Window.grid(2, 2)
    planes = np.array([[plane_from_equation([1, 0, 0], 0), plane_from_equation([0, 1, 0], 0)],
                       [plane_from_equation([1, 1, 1], 0), plane_from_equation([0, 0, 1], 0)]])
    pts = box_star_points(BiStarNet(w, planes, np.full((1, 1, 4), np.nan)))
    assert np.allclose(pts.face[0, 0], 0, atol=1e-15)
    planes[1, 1] = plane_from_equation([0, 0, 1], 1)
    with pytest.raises(NotConjugateError):
        box_star_points(BiStarNet(w, planes, np.full((1, 1, 4), np.nan)))


def test_box_rejects_non_conjugate():
    b = generate_principal(1, 5, 5)
    b.vertex[2, 2] += [0, 0, 0.1]
    with pytest.raises(NotConjugateError) as exc:
        box_planes(b)
    assert exc.value.worst is not None


def planes_agree(a, b):
    ok = np.all(np.isfinite(a), axis=-1) & np.all(np.isfinite(b), axis=-1)
    a, b = a[ok], b[ok]
    sign = np.sign(np.sum(a[:, :3] * b[:, :3], axis=-1))[:, None]
    return ok.sum(), float(np.max(np.abs(a - sign * b))) if len(a) else 0.0


@settings(max_examples=15)
@given(seeds)
def test_box_round_trips(seed):
    b = generate_principal(seed, 6, 6)
    bs = box_planes(b)
    back = box_star_points(bs)
    diameter = np.ptp(b.vertex.reshape(-1, 3), axis=0).max()
    assert max_point_discrepancy(back, b) < 1e-9 * max(diameter, 1.0)
    again = box_planes(back)
    n, err = planes_agree(again.face, bs.face)
    assert n > 0 and err < 1e-9 * max(diameter, 1.0)


@settings(max_examples=15)
@given(seeds)
def test_projective_invariance_of_conjugacy(seed):
    rng = np.random.default_rng(seed)
    b = generate_principal(seed, 5, 5)
    t = near_identity_projective(rng)
    assert check_conjugate(apply_projective(b, t), 1e-9).passed
    noisy = b.copy()
    noisy.vertex += 0.05 * rng.normal(size=noisy.vertex.shape)
    assert check_conjugate(apply_projective(noisy, t), 1e-9).passed is check_conjugate(noisy, 1e-9).passed is False


@settings(max_examples=15)
@given(seeds, st.floats(0.1, 10.0))
def test_similarity_invariance_of_orthogonality(seed, scale):
    rng = np.random.default_rng(seed)
    b = generate_principal(seed, 5, 5)
    b.vertex += 0.01 * rng.normal(size=b.vertex.shape)
    s = apply_similarity(b, random_rotation(rng), scale, rng.normal(size=3))
    r1, r2 = check_orthogonal(b).residuals, check_orthogonal(s).residuals
    assert max(abs(r1[k] - r2[k]) for k in r1) < 1e-12


@settings(max_examples=10)
@given(seeds)
def test_orthogonal_iff_box_orthogonal(seed):
    rng = np.random.default_rng(seed)
    b = generate_principal(seed, 5, 5)
    assert check_orthogonal(b).passed and check_bistar_orthogonal(box_planes(b)).passed
    skewed = apply_projective(b, near_identity_projective(rng, 0.2))
    assert check_conjugate(skewed).passed
    assert not check_orthogonal(skewed).passed
    assert not check_bistar_orthogonal(box_planes(skewed)).passed


def test_polar_binet_examples():
    lift = moebius_lift(grid_binet(4, 4)).points
    assert check_polar_binet(lift, MOEBIUS).max_residual < 1e-15
    w = Window.grid(2, 2)
    vert = np.array([[[0.3, -0.2, 1, 1], [1.5, 0.0, 1, 1]], [[-2, 4, 1, 1], [0, 0, 1, 1]]])
    face = np.array([[[0, 0, 1, 1]]], dtype=float)
    assert check_polar_binet(Binet(w, vert, face, "UnitSphere"), UNIT_SPHERE).max_residual < 1e-16
    rng = np.random.default_rng(0)
    rand = Binet(Window.grid(3, 3), rng.normal(size=(3, 3, 5)), rng.normal(size=(2, 2, 5)), "Moebius")
    assert check_polar_binet(rand, MOEBIUS).max_residual > 0.1


def test_polar_binet_invariant_under_form_isometry():
    lift = moebius_lift(generate_principal(2, 5, 5)).points
    t = random_form_isometry(MOEBIUS, 7).matrix
    moved = lift.with_arrays(lift.vertex @ t.T, lift.face @ t.T)
    assert check_polar_binet(moved, MOEBIUS).max_residual < 1e-10

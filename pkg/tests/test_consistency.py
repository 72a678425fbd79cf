import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from binets.binet import Binet, check_conjugate
from binets.constructors import DegenerateDataError, generate_principal, torus_profile, revolution_binet
from binets.consistency import (
    BOTTOM_FACES,
    CUBE_OFFSETS,
    FACE_CELLS,
    TOP_FACES,
    VERTEX_LABELS,
    Binet3D,
    CubeData,
    _vertex_plane,
    check_conjugate_3d,
    check_facenet_3d,
    check_orthogonal_3d,
    check_polar_3d,
    check_principal_3d,
    check_symmetric_completion,
    complete_polar_cube,
    cube_discrepancy,
    extend_principal_to_z3,
    facenet_completion,
    generate_conjugate_net_3d,
    generate_initial_slices,
    grid_binet_3d,
    grid_slices,
    meet_planes,
    permutation_discrepancy,
    random_polar_cube,
    vertex_plane_meet_check,
)
from binets.lattice import Face, Vertex, Window, crosses
from binets.projective import MOEBIUS, inner, normalize

seeds = st.integers(0, 10_000)


@pytest.fixture(scope="module")
def extension():
    base = generate_principal(1, 5, 5, 0.1, (0, 0))
    return extend_principal_to_z3(generate_initial_slices(base, seed=1))


# ---------------------------------------------------------------------------
# meets and cubes


def test_meet_planes_point_and_failure():
    e = np.eye(5)
    x, res = meet_planes([e[[0, 1, 2]], e[[0, 3, 4]]])
    assert np.allclose(np.abs(x), e[0]) and res < 1e-15
    with pytest.raises(DegenerateDataError):
        meet_planes([e[[0, 1, 2]], e[[0, 1, 3]]])


@settings(max_examples=40)
@given(seeds)
def test_hidden_cube_data_recovered(seed):
    full = random_polar_cube(seed)
    done = complete_polar_cube(full.hidden())
    assert cube_discrepancy(done, full) < 1e-9
    assert done.residuals["max_polarity"] < 1e-8
    assert len(done.residuals["polarity"]) == 12


@settings(max_examples=20)
@given(seeds)
def test_cube_direction_permutations(seed):
    assert permutation_discrepancy(random_polar_cube(seed).hidden()) < 1e-10


def test_cube_completion_is_deterministic():
    data = random_polar_cube(3).hidden()
    a, b = complete_polar_cube(data), complete_polar_cube(data)
    assert cube_discrepancy(a, b) == 0


def test_cube_missing_vertex_rejected():
    data = random_polar_cube(0).hidden()
    del data.vertices["12"]
    with pytest.raises(ValueError):
        complete_polar_cube(data)


def test_cube_from_extension_lift(extension):
    lift = extension.lift
    for corner in [(0, 0, 0), (1, 0, 1), (1, 1, 1)]:
        base = np.array(corner)

        def v(label):
            return Vertex(*(base + CUBE_OFFSETS[label]))

        def f(label):
            plane, off = FACE_CELLS[label]
            return Face(*(base + off), plane=plane)

        data = CubeData(
            {k: lift[v(k)] for k in VERTEX_LABELS[:-1]},
            {k: lift[f(k)] for k in BOTTOM_FACES},
            {k: _vertex_plane(lift, v(k), 1e-9) for k in VERTEX_LABELS[1:-1]},
        )
        truth = CubeData({k: lift[v(k)] for k in VERTEX_LABELS}, {k: lift[f(k)] for k in BOTTOM_FACES + TOP_FACES}, {})
        assert cube_discrepancy(complete_polar_cube(data), truth) < 1e-9


# ---------------------------------------------------------------------------
# face-net completion


@settings(max_examples=10)
@given(seeds)
def test_facenet_completion_of_random_qnet(seed):
    g = generate_conjugate_net_3d(seed, (4, 4, 4), 0.1)
    done, skew = facenet_completion(g)
    assert skew < 1e-8
    assert check_facenet_3d(done).max_residual < 1e-8
    assert vertex_plane_meet_check(g, done) < 1e-8
    # restriction to each face family is a 2D conjugate net
    for plane, arr in done.faces.items():
        if plane == 12:
            continue
        for level in range(arr.shape[0]):
            sub = arr[level] if plane == 23 else arr[:, level]
            net = sub[np.all(np.isfinite(sub), axis=-1).all(axis=1)]
            if net.shape[0] >= 2 and net.shape[1] >= 2:
                w = Window.grid(*net.shape[:2])
                rep = check_conjugate(Binet(w, net, np.full((net.shape[0] - 1, net.shape[1] - 1, 3), np.nan)))
                assert rep.max_residual < 1e-8


def test_affine_grid_completion_goes_to_infinity():
    idx = np.stack(np.meshgrid(np.arange(3.0), np.arange(3.0), np.arange(3.0), indexing="ij"), axis=-1)
    with pytest.raises(DegenerateDataError, match="infinity"):
        facenet_completion(idx)
    hom = np.concatenate([idx, np.ones(idx.shape[:-1] + (1,))], axis=-1)
    done, _ = facenet_completion(hom)
    vals = done.faces[13][np.all(np.isfinite(done.faces[13]), axis=-1)]
    assert len(vals) > 0 and np.allclose(vals[:, 3], 0)


def test_skew_lines_rejected():
    g = generate_conjugate_net_3d(0, (3, 3, 3), 0.1)
    g[1, 1, 1] += [0.0, 0.0, 0.2]
    with pytest.raises(DegenerateDataError, match="skew"):
        facenet_completion(g)


def test_extension_faces_are_a_completion(extension):
    b = extension.binet
    done, _ = facenet_completion(b.faces[12])
    for plane in (13, 23):
        ref = b.faces[plane][tuple(slice(0, s) for s in done.faces[plane].shape[:3])]
        ok = np.all(np.isfinite(done.faces[plane]), axis=-1) & np.all(np.isfinite(ref), axis=-1)
        assert ok.sum() > 0
        diff = np.linalg.norm(done.faces[plane][ok] - ref[ok], axis=-1)
        assert diff.max() < 1e-9 * (1 + np.abs(ref[ok]).max())


# ---------------------------------------------------------------------------
# extension of principal binets


def test_extension_is_principal(extension):
    b = extension.binet
    assert b.window.shape == (4, 4, 4)
    assert extension.initial_polarity < 1e-9
    assert extension.max_cube_polarity < 1e-8
    assert check_conjugate_3d(b, 1e-8).passed
    orth = check_orthogonal_3d(b, 1e-8)
    assert orth.passed and orth.count == len(crosses(b.window))
    per_edge = {}
    for cr in orth.residuals:
        per_edge[(cr.v, cr.v_next)] = per_edge.get((cr.v, cr.v_next), 0) + 1
    assert max(per_edge.values()) == 6
    assert check_polar_3d(extension.lift, MOEBIUS, 1e-8).passed


def test_extension_keeps_initial_slices(extension):
    base = generate_principal(1, 5, 5, 0.1, (0, 0))
    assert np.allclose(extension.binet.vertex[:, :, 0], base.vertex[:4, :4], atol=1e-9)


def test_extension_order_independence():
    base = revolution_binet(torus_profile(5, 5))
    slices = generate_initial_slices(base, seed=2)
    ref = extend_principal_to_z3(slices, order="kji").binet
    for order in ("ijk", "diagonal"):
        other = extend_principal_to_z3(slices, order=order).binet
        assert np.nanmax(np.abs(other.vertex - ref.vertex)) < 1e-9
        for p in (12, 13, 23):
            assert np.nanmax(np.abs(other.faces[p] - ref.faces[p])) < 1e-9 * (1 + np.nanmax(np.abs(ref.faces[p])))


def test_revolution_slices_extend_to_principal():
    base = revolution_binet(torus_profile(5, 5))
    ext = extend_principal_to_z3(generate_initial_slices(base, seed=0))
    assert check_principal_3d(ext.binet, 1e-8).passed


def test_grid_slices_recover_grid_vertices():
    ext = extend_principal_to_z3(grid_slices(4))
    truth = grid_binet_3d(3)
    assert np.max(np.abs(ext.binet.vertex - truth.vertex)) < 1e-12


def test_mismatched_slices_rejected():
    s12, s13, s23 = grid_slices(4)
    s13 = type(s13)(s13.window, s13.vertex.copy(), s13.face)
    s13.vertex[2, 0] += 0.1
    with pytest.raises(ValueError, match="shared axis"):
        extend_principal_to_z3((s12, s13, s23))


def test_extension_runtime():
    base = generate_principal(5, 5, 5, 0.1, (0, 0))
    t0 = time.perf_counter()
    extend_principal_to_z3(generate_initial_slices(base, seed=5))
    assert time.perf_counter() - t0 < 30


# ---------------------------------------------------------------------------
# symmetric completion


def test_symmetric_completion_on_principal_pair(extension):
    b = extension.binet
    rep = check_symmetric_completion(b.vertex, b.faces[12])
    assert rep.first.passed and rep.second.passed and rep.agree


def test_symmetric_completion_agrees_on_random_pairs():
    agree = 0
    for seed in range(50):
        g = generate_conjugate_net_3d(seed, (4, 4, 4), 0.1)
        h = generate_conjugate_net_3d(seed + 1000, (3, 3, 4), 0.1)
        rep = check_symmetric_completion(g, h)
        assert not rep.first.passed and not rep.second.passed
        agree += rep.agree
    assert agree == 50


def test_binet3d_slicing():
    g = grid_binet_3d(3)
    s = g.slice(13, 1)
    assert s.window.shape == (3, 3)
    assert np.allclose(s.vertex[2, 1], [2, 1, 1])
    with pytest.raises(ValueError):
        Binet3D(Window.box(3, 3, 3), np.zeros((3, 3, 2, 3)), g.faces)

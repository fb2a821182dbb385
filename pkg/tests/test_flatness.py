import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from neardist.constructions import extension_construction, nonglobal_flat_example, \
    regular_polygon, rhombus_triangle
from neardist.flatness import (Subspace, almost_orthogonal, angle_vector_plane,
                               check_claim_beta, check_lemma_almosto, certify_flatness,
                               fit_subspace, intersection, principal_angles)
from neardist.geometry import PointSet, embed

XY = Subspace.coordinate([0, 1], 3)


def test_angle_examples():
    assert angle_vector_plane([0, 0, 1], XY) == pytest.approx(np.pi / 2)
    assert angle_vector_plane([1, 0, 1], XY) == pytest.approx(np.pi / 4)
    assert angle_vector_plane([3, -2, 0], XY) == 0
    with pytest.raises(ValueError, match="zero"):
        angle_vector_plane([0, 0, 0], XY)


def test_tiny_angles_are_accurate():
    # atan2 keeps precision where arccos of a near-1 cosine would not
    assert angle_vector_plane([1, 0, 1e-10], XY) == pytest.approx(1e-10, rel=1e-6)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 6), st.integers(0, 10**6))
def test_angle_invariant_under_rotation(dim, seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, dim + 1))
    plane = Subspace.span(rng.normal(size=(d, dim)))
    v = rng.normal(size=dim)
    q, _ = np.linalg.qr(rng.normal(size=(dim, dim)))
    moved = Subspace(plane.basis @ q.T, np.zeros(dim))
    assert angle_vector_plane(v @ q.T, moved) == pytest.approx(angle_vector_plane(v, plane),
                                                                abs=1e-8)


def test_subspace_validation():
    with pytest.raises(ValueError, match="orthonormal"):
        Subspace([[1, 1, 0]], [0, 0, 0])
    with pytest.raises(ValueError):
        Subspace(np.eye(3), [0, 0])
    assert Subspace.span([[1, 0, 0], [2, 0, 0]]).dim == 1
    assert XY.complement().dim == 1


def test_fit_collinear():
    fit = fit_subspace([[1, 0, 0], [-3, 0, 0], [0.5, 0, 0]], 1)
    assert fit.max_angle == pytest.approx(0, abs=1e-12)
    with pytest.raises(ValueError):
        fit_subspace([[1, 0]], 3)


def test_fit_standard_basis_no_plane_beats_bound():
    bound = np.arcsin(3 ** -0.5)
    # grid over unit normals of 2-planes in R^3: angle of e_i to the plane is arcsin |n_i|
    th, ph = np.meshgrid(np.linspace(0, np.pi, 400), np.linspace(0, 2 * np.pi, 800))
    normals = np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=-1)
    best = np.arcsin(np.abs(normals).max(axis=-1)).min()
    assert best >= bound - 1e-3
    fit = fit_subspace(np.eye(3), 2)
    assert np.isfinite(fit.max_angle)
    assert fit.max_angle >= bound - 1e-9
    # the returned angle is a real certificate for the returned plane
    for e in np.eye(3):
        assert angle_vector_plane(e, fit.plane) <= fit.max_angle + 1e-12


def test_fit_pentagon_directions():
    pent = embed(regular_polygon(5), 3).array
    fit = fit_subspace(pent[1:] - pent[0], 2)
    assert fit.max_angle <= 1e-9


def test_refinement_never_worse_than_pca():
    rng = np.random.default_rng(4)
    vecs = rng.normal(size=(30, 4)) * [5, 4, 0.3, 0.2]
    assert fit_subspace(vecs, 2).max_angle <= fit_subspace(vecs, 2, refine=0).max_angle + 1e-12


def test_certify_small_sets():
    one = PointSet.floating([[0.0, 0.0]])
    assert certify_flatness(one, 0, 0.1, "uniform")
    two = PointSet.floating([[0.0, 0.0], [1.0, 1.0]])
    assert not certify_flatness(two, 0, 0.1, "uniform")
    assert certify_flatness(two, 0, 0.1, "almost")
    assert certify_flatness(two, 1, 0.0, "global")


def test_planar_rhombus_set_globally_flat():
    ps = embed(rhombus_triangle(1e6).points, 3)
    cert = certify_flatness(ps, 2, 1e-9, "global")
    assert cert and cert.max_angle <= 1e-9


def test_nonglobal_example_certificates():
    ps = nonglobal_flat_example(1e4).points
    assert certify_flatness(ps, 3, 0.01, "uniform")
    for p in range(6):
        assert certify_flatness(ps, 3, 0.01, "per-point", base=p)
    ref = certify_flatness(ps, 3, np.pi / 6, "global")
    assert not ref
    assert "heuristic" in ref.note
    i, j, ang, u, v = ref.witness_pair
    assert ang >= np.pi / 2 - 0.01


def test_almost_kind_allows_two_exceptions():
    # points on a line plus one point just off it: line points tilt to absorb it,
    # the off-line point sees directions on both sides and cannot
    ps = PointSet.floating([(10.0 * i, 0.0) for i in range(10)] + [(45.0, 3.0)])
    assert not certify_flatness(ps, 1, 0.4, "uniform")
    cert = certify_flatness(ps, 1, 0.4, "almost")
    assert cert
    assert cert.exceptional_points == (10,)
    assert 10 not in cert.planes
    assert not certify_flatness(ps, 1, 0.2, "almost")


@settings(max_examples=25, deadline=None)
@given(st.integers(3, 9), st.integers(2, 5), st.integers(0, 10**6))
def test_certificate_monotonicity(n, dim, seed):
    rng = np.random.default_rng(seed)
    arr = rng.normal(size=(n, dim)) * 10
    arr[:, -1] *= 0.01
    ps = PointSet.floating(arr, check=False)
    d, alpha = dim - 1, 0.2
    if certify_flatness(ps, d, alpha, "global"):
        assert certify_flatness(ps, d, alpha, "uniform")
    if certify_flatness(ps, d, alpha, "uniform"):
        assert all(certify_flatness(ps, d, alpha, "per-point", base=p) for p in range(n))


@settings(max_examples=25, deadline=None)
@given(st.integers(3, 15), st.integers(3, 6), st.integers(0, 10**6))
def test_planar_data_globally_flat(n, dim, seed):
    arr = np.zeros((n, dim))
    arr[:, :2] = np.random.default_rng(seed).normal(size=(n, 2)) * 10
    ps = PointSet.floating(arr, check=False)
    assert certify_flatness(ps, 2, 1e-9, "global")


def test_intersection_and_principal_angles():
    yz = Subspace.coordinate([1, 2], 3)
    line = intersection(XY, yz)
    assert line.dim == 1
    assert abs(abs(line.basis[0, 1]) - 1) < 1e-12
    assert principal_angles(XY, yz) == pytest.approx([0, np.pi / 2])


def test_almost_orthogonal_examples():
    yz = Subspace.coordinate([1, 2], 3)
    w = almost_orthogonal(XY, yz)
    assert w and w.basis.shape == (3, 3)
    assert almost_orthogonal(XY, XY)
    tilt = 0.2
    tilted = Subspace([[0, 1, 0], [np.sin(tilt), 0, np.cos(tilt)]], [0, 0, 0])
    assert not almost_orthogonal(XY, tilted)
    small = Subspace([[0, 1, 0], [np.sin(0.005), 0, np.cos(0.005)]], [0, 0, 0])
    assert almost_orthogonal(XY, small)
    with pytest.raises(ValueError):
        almost_orthogonal(XY, Subspace.coordinate([0], 2))
    with pytest.raises(ValueError, match="common point"):
        almost_orthogonal(XY, Subspace.coordinate([0, 1], 3, base_point=[0, 0, 1]))


def test_witness_basis_is_orthonormal_and_split():
    yz = Subspace.coordinate([1, 2], 3)
    w = almost_orthogonal(XY, yz)
    assert np.allclose(w.basis @ w.basis.T, np.eye(3), atol=1e-9)
    first = Subspace.span(w.basis[:w.b])
    assert principal_angles(first, XY) == pytest.approx([0, 0], abs=1e-9)


def test_lemma_almosto_examples():
    for alpha in (0.1, 0.3):
        rep = check_lemma_almosto(500, seed=3, alpha=alpha)
        assert rep.ok and rep.samples == 500
        assert rep.max_ratio <= 10
    with pytest.raises(ValueError):
        check_lemma_almosto(10, alpha=0.5)


def test_claim_beta_examples():
    rep = check_claim_beta(1000, K=2, alpha=1e-3, seed=7)
    assert rep.ok and rep.samples == 1000
    assert rep.max_angle <= 20 * (2e-3) ** 0.5
    zero = check_claim_beta(200, K=3, alpha=0.0, seed=1)
    assert zero.max_angle <= 1e-7
    with pytest.raises(ValueError):
        check_claim_beta(10, K=0.5)


def test_sampling_is_seed_deterministic():
    a = check_claim_beta(300, K=10, alpha=1e-4, seed=9)
    b = check_claim_beta(300, K=10, alpha=1e-4, seed=9)
    assert a.max_angle == b.max_angle
    assert check_lemma_almosto(100, seed=2).summary() == check_lemma_almosto(100, seed=2).summary()


def test_extension_base_directions_flat():
    ext = extension_construction(regular_polygon(5), 50)
    parts = np.array(ext.extra["parts"])
    arr = ext.points.array
    firsts = arr[[int(np.flatnonzero(parts == v)[0]) for v in range(5)]]
    fit = fit_subspace(firsts[1:] - firsts[0], 2)
    assert fit.max_angle <= 1e-9

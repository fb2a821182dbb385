from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from neardist.geometry import (DistanceMultiset, PointSet, embed, is_separated, min_distance,
                               normalize_min_distance, pairwise_distances, rescale, translate)


def test_pointset_is_immutable():
    ps = PointSet.exact([[0, 0], [1, 0]])
    with pytest.raises(AttributeError):
        ps.dim = 3
    with pytest.raises(ValueError):
        ps.array[0, 0] = 5.0


def test_duplicates_rejected():
    with pytest.raises(ValueError, match="coincide"):
        PointSet.exact([[0, 0], [Fraction(2, 2), 0], [1, 0]])
    with pytest.raises(ValueError):
        PointSet.floating([[0.0, 0.0], [1e-12, 0.0]])


def test_bad_shapes():
    with pytest.raises(ValueError):
        PointSet.floating([[0.0, 0.0], [1.0]])
    with pytest.raises(ValueError):
        PointSet.floating([[np.nan, 0.0]])


def test_unit_square_distances():
    ps = PointSet.exact([[0, 0], [1, 0], [0, 1], [1, 1]])
    ds = pairwise_distances(ps)
    assert list(ds.squared) == [1, 1, 1, 1, 2, 2]
    assert ds.distinct_count() == 2
    assert len(ds.pairs) == 6


def test_pairs_track_values():
    rng = np.random.default_rng(3)
    ps = PointSet.floating(rng.normal(size=(12, 3)))
    ds = pairwise_distances(ps)
    for (i, j), v in zip(ds.pairs, ds.values):
        assert abs(ps.distance(int(i), int(j)) - v) < 1e-12
    assert np.all(np.diff(ds.values) >= 0)


def test_degenerate_pairwise():
    with pytest.raises(ValueError, match="degenerate"):
        pairwise_distances(PointSet.floating([[0.0]]))


def test_separation_witness_is_first_pair():
    ps = PointSet.floating([[0.0, 0.0], [5.0, 0.0], [5.5, 0.0], [0.3, 0.0]])
    sep = is_separated(ps)
    assert not sep
    assert sep.witness == (0, 3)
    ex = PointSet.exact([[0, 0], [3, 0], [3, Fraction(1, 2)]])
    assert is_separated(ex).witness == (1, 2)
    assert is_separated(PointSet.exact([[0], [1], [2]]))


def test_normalize_and_rescale():
    ps = PointSet.exact([[0, 0], [2, 0], [0, 3]])
    n = normalize_min_distance(ps)
    assert n.squared_distance(0, 1) == 1
    with pytest.raises(ValueError, match="irrational"):
        normalize_min_distance(PointSet.exact([[0, 0], [1, 1]]))
    f = normalize_min_distance(PointSet.floating([[0, 0], [1, 1], [5, 5]]))
    assert abs(min_distance(f) - 1) < 1e-12
    assert rescale(ps, 2).squared_distance(0, 1) == 16
    t = translate(ps, [1, 1])
    assert t.points[0] == (1, 1)


def test_embed_pads_zeros():
    ps = embed(PointSet.exact([[1, 2]]), 4)
    assert ps.points[0] == (1, 2, 0, 0)
    with pytest.raises(ValueError):
        embed(ps, 2)


def test_exact_float_agree():
    rng = np.random.default_rng(0)
    pts = [[Fraction(int(x), 7) for x in row] for row in rng.integers(-40, 40, size=(9, 3))]
    ex = PointSet.exact(pts, check=False)
    fl = ex.to_float()
    a, b = pairwise_distances(ex), pairwise_distances(fl)
    assert np.allclose(a.values, b.values)


def test_from_values_and_scaling():
    ds = DistanceMultiset.from_values([3, 1, 2], exact=True)
    assert list(ds.squared) == [1, 4, 9]
    assert list(ds.scaled(2).squared) == [4, 16, 36]
    with pytest.raises(ValueError):
        DistanceMultiset.from_values([-1.0])


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 12), st.integers(1, 4), st.integers(0, 10**6))
def test_distances_invariant_under_rigid_motion(n, d, seed):
    rng = np.random.default_rng(seed)
    arr = rng.normal(size=(n, d)) * 5
    q, _ = np.linalg.qr(rng.normal(size=(d, d)))
    moved = arr @ q.T + rng.normal(size=d)
    a = pairwise_distances(PointSet.floating(arr, check=False)).values
    b = pairwise_distances(PointSet.floating(moved, check=False)).values
    assert np.allclose(a, b, atol=1e-9)

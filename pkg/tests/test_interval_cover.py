from decimal import Decimal, getcontext
from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from neardist.geometry import DistanceMultiset, PointSet, pairwise_distances
from neardist.interval_cover import Gap, is_nearly_k_distance, min_epsilon, min_intervals

getcontext().prec = 60


def _dec(q):
    q = Fraction(q)
    return Decimal(q.numerator) / Decimal(q.denominator)


def groupings(n):
    """Every split of range(n) into consecutive nonempty blocks, as lists of (start, end)."""
    for r in range(n):
        for cuts in combinations(range(1, n), r):
            bounds = (0,) + cuts + (n,)
            yield [(bounds[i], bounds[i + 1]) for i in range(len(bounds) - 1)]


def brute_min_intervals(values, eps):
    v = sorted(values)
    return min(len(g) for g in groupings(len(v)) if all(v[e - 1] - v[s] <= eps for s, e in g))


def brute_min_epsilon(values, k):
    v = sorted(values)
    return min(max(v[e - 1] - v[s] for s, e in g) for g in groupings(len(v)) if len(g) <= k)


def test_small_example_both_modes():
    fl = DistanceMultiset.from_values([1, 2, 3, 10])
    ex = DistanceMultiset.from_values([1, 2, 3, 10], exact=True)
    assert float(min_epsilon(fl, 2).epsilon) == pytest.approx(2.0)
    assert min_epsilon(ex, 2).epsilon == 2
    assert min_intervals(fl, 2).k_used == 2
    assert min_intervals(fl, 1.9).k_used == 3
    assert min_intervals(ex, 9).k_used == 1


def test_pentagon_two_distances():
    ang = 2 * np.pi * np.arange(5) / 5
    ps = PointSet.floating(np.column_stack([np.cos(ang), np.sin(ang)]) / (2 * np.sin(np.pi / 5)))
    rep = min_epsilon(pairwise_distances(ps), 2)
    assert float(rep.epsilon) < 1e-12
    assert rep.k_used == 2


def test_unit_square_exact_gap():
    ps = PointSet.exact([[0, 0], [1, 0], [0, 1], [1, 1]])
    rep = min_epsilon(pairwise_distances(ps), 1)
    assert rep.epsilon == Gap(2, 1)
    assert rep.epsilon.rational is None
    assert float(rep.epsilon) == pytest.approx(np.sqrt(2) - 1)
    assert rep.verify(pairwise_distances(ps))


def test_closed_boundary_counts_inside():
    ds = DistanceMultiset.from_values([1, 2], exact=True)
    assert min_intervals(ds, 1).k_used == 1
    assert min_intervals(ds, Fraction(999, 1000)).k_used == 2


def test_empty_and_bad_arguments():
    ds = DistanceMultiset([], exact=True)
    assert min_epsilon(ds, 1).k_used == 0
    with pytest.raises(ValueError):
        min_epsilon(DistanceMultiset.from_values([1.0]), 0)
    with pytest.raises(ValueError):
        min_intervals(DistanceMultiset.from_values([1.0]), -1)


def test_greedy_matches_exhaustive_partitions():
    rng = np.random.default_rng(11)
    for _ in range(300):
        n = int(rng.integers(1, 11))
        values = np.round(rng.uniform(1, 20, size=n), 3)
        eps = float(rng.uniform(0, 6))
        ds = DistanceMultiset.from_values(values)
        assert min_intervals(ds, eps).k_used == brute_min_intervals(values, eps + ds.tol)
        k = int(rng.integers(1, n + 1))
        assert float(min_epsilon(ds, k).epsilon) == pytest.approx(brute_min_epsilon(values, k),
                                                                  abs=1e-12)


def test_exact_min_epsilon_matches_decimal_oracle():
    rng = np.random.default_rng(5)
    for _ in range(100):
        n = int(rng.integers(2, 9))
        squares = [int(x) for x in rng.integers(1, 400, size=n)]
        ds = DistanceMultiset(squares, exact=True)
        k = int(rng.integers(1, n + 1))
        roots = [Decimal(s).sqrt() for s in squares]
        want = brute_min_epsilon(roots, k)
        got = min_epsilon(ds, k).epsilon
        value = _dec(got.hi).sqrt() - _dec(got.lo).sqrt()
        assert abs(value - want) < Decimal(10) ** -40


def test_seed_does_not_change_result():
    rng = np.random.default_rng(2)
    ds = DistanceMultiset.from_values(rng.uniform(1, 50, size=200))
    eps = {float(min_epsilon(ds, 7, seed=s).epsilon) for s in range(5)}
    assert len(eps) == 1


@settings(max_examples=80, deadline=None)
@given(st.lists(st.floats(1, 100, allow_nan=False), min_size=1, max_size=30),
       st.integers(1, 6))
def test_certificate_verifies(values, k):
    ds = DistanceMultiset.from_values(values)
    rep = min_epsilon(ds, k)
    assert rep.k_used <= k
    assert rep.verify(ds)
    # the optimum is tight: a slightly smaller width needs more intervals
    eps = float(rep.epsilon)
    if eps > 1e-6:
        assert min_intervals(ds, eps * (1 - 1e-6) - 2 * ds.tol).k_used > k


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(1, 100, allow_nan=False), min_size=2, max_size=20), st.floats(0, 5))
def test_min_intervals_monotone_in_eps(values, eps):
    ds = DistanceMultiset.from_values(values)
    assert min_intervals(ds, eps).k_used >= min_intervals(ds, eps + 1).k_used


def test_is_nearly_k_distance():
    square = PointSet.exact([[0, 0], [1, 0], [0, 1], [1, 1]])
    assert is_nearly_k_distance(square, 2, 0)
    assert not is_nearly_k_distance(square, 1, Fraction(2, 5))
    assert is_nearly_k_distance(square, 1, Fraction(42, 100))
    small = PointSet.exact([[0, 0], [Fraction(1, 2), 0], [1, 0]])
    res = is_nearly_k_distance(small, 2, 0)
    assert not res and "separated" in res.reason
    assert is_nearly_k_distance(small, 2, 0, require_t_ge_1=False)
    assert is_nearly_k_distance(PointSet.exact([[0]]), 1, 0)

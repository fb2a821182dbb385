"""Covering a distance multiset with closed intervals of a common width.

``min_intervals`` is the classical greedy sweep, optimal for fixed-width
covers of points on a line. ``min_epsilon`` inverts it: the smallest width
for which ``k`` intervals suffice. The optimum is always the span of some
group of consecutive values, so it is found by selection over the sorted
matrix of pairwise gaps, with the greedy count as the feasibility oracle.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import total_ordering

import numpy as np

from .geometry import DistanceMultiset, PointSet, is_separated, pairwise_distances, to_fraction
from .surds import exact_sqrt, sign_sqrt_sum


@total_ordering
class Gap:
    """The exact nonnegative number ``sqrt(hi) - sqrt(lo)`` (``hi >= lo >= 0`` rationals)."""

    __slots__ = ("hi", "lo")

    def __init__(self, hi, lo=0):
        self.hi, self.lo = to_fraction(hi), to_fraction(lo)
        if self.lo < 0 or self.hi < self.lo:
            raise ValueError("a gap needs hi >= lo >= 0")

    @classmethod
    def of(cls, value) -> "Gap":
        if isinstance(value, Gap):
            return value
        v = to_fraction(value)
        if v < 0:
            raise ValueError("width must be nonnegative")
        return cls(v * v, 0)

    def _cmp(self, other) -> int:
        other = Gap.of(other)
        return sign_sqrt_sum(self.hi, other.lo, other.hi, self.lo)

    def __eq__(self, other):
        try:
            return self._cmp(other) == 0
        except (TypeError, ValueError):
            return NotImplemented

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __hash__(self):
        return hash(float(self))

    def __float__(self):
        return float(np.sqrt(float(self.hi)) - np.sqrt(float(self.lo)))

    def scaled(self, c) -> "Gap":
        c2 = to_fraction(c) ** 2
        return Gap(self.hi * c2, self.lo * c2)

    @property
    def rational(self) -> Fraction | None:
        """The value as a Fraction when both roots are rational."""
        a, b = exact_sqrt(self.hi), exact_sqrt(self.lo)
        return None if a is None or b is None else a - b

    def __repr__(self):
        r = self.rational
        if r is not None:
            return f"Gap({r})"
        return f"Gap(sqrt({self.hi}) - sqrt({self.lo}) ~ {float(self):.6g})"


class _FloatLine:
    def __init__(self, ds: DistanceMultiset):
        self.v = np.asarray(ds.values, dtype=float)
        self.tol = ds.tol

    def __len__(self):
        return len(self.v)

    def reach(self, i: int, eps) -> int:
        """Last index j such that v[j] lies in [v[i], v[i] + eps] (with tolerance)."""
        return int(np.searchsorted(self.v, self.v[i] + eps + self.tol, side="right")) - 1

    def gap(self, i: int, j: int) -> float:
        return float(self.v[j] - self.v[i])

    def first_at_least(self, rows: np.ndarray, g) -> np.ndarray:
        # first column j with v[j] - v[i] >= g
        return np.searchsorted(self.v, self.v[rows] + g, side="left")

    def first_above(self, rows: np.ndarray, g) -> np.ndarray:
        return np.searchsorted(self.v, self.v[rows] + g, side="right")

    def distinct(self) -> "_FloatLine":
        out = object.__new__(_FloatLine)
        out.v = np.unique(self.v)
        out.tol = self.tol
        return out

    def zero(self):
        return 0.0


class _ExactLine:
    def __init__(self, ds: DistanceMultiset):
        self.v = list(ds.squared)
        self.tol = 0.0

    def __len__(self):
        return len(self.v)

    def _fits(self, i: int, j: int, eps: Gap) -> bool:
        # sqrt(v_j) - sqrt(v_i) <= sqrt(eps.hi) - sqrt(eps.lo)
        return sign_sqrt_sum(self.v[j], eps.lo, self.v[i], eps.hi) <= 0

    def reach(self, i: int, eps: Gap) -> int:
        lo, hi = i, len(self.v) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self._fits(i, mid, eps):
                lo = mid
            else:
                hi = mid - 1
        return lo

    def gap(self, i: int, j: int) -> Gap:
        return Gap(self.v[j], self.v[i])

    def _first(self, i: int, g: Gap, strict: bool) -> int:
        lo, hi = i + 1, len(self.v)
        while lo < hi:
            mid = (lo + hi) // 2
            c = self.gap(i, mid)._cmp(g)
            if c > 0 or (c == 0 and not strict):
                hi = mid
            else:
                lo = mid + 1
        return lo

    def first_at_least(self, rows, g):
        return np.array([self._first(int(i), g, strict=False) for i in rows], dtype=np.int64)

    def first_above(self, rows, g):
        return np.array([self._first(int(i), g, strict=True) for i in rows], dtype=np.int64)

    def distinct(self) -> "_ExactLine":
        out = object.__new__(_ExactLine)
        out.v = sorted(set(self.v))
        out.tol = 0.0
        return out

    def zero(self):
        return Gap(0, 0)


def _line(ds: DistanceMultiset):
    return _ExactLine(ds) if ds.exact else _FloatLine(ds)


def _coerce_eps(eps, exact: bool):
    if exact:
        return Gap.of(eps)
    eps = float(eps)
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    return eps


def _greedy_starts(line, eps, limit: int | None = None) -> list[int]:
    starts, i, n = [], 0, len(line)
    while i < n:
        starts.append(i)
        if limit is not None and len(starts) > limit:
            break
        i = line.reach(i, eps) + 1
    return starts


@dataclass(frozen=True)
class IntervalCoverReport:
    """Intervals ``[left[i], left[i] + epsilon]`` covering every distance.

    ``assignment[m]`` is the interval holding the m-th smallest distance. In
    floating mode membership is checked against ``width = epsilon + tol``.
    """

    k_used: int
    epsilon: object
    exact: bool
    tol: float
    left: tuple
    left_squared: tuple | None
    assignment: tuple
    pairs: object = field(default=None, repr=False, compare=False)

    @property
    def width(self) -> float:
        return float(self.epsilon) + self.tol

    @property
    def t1(self):
        return self.left[0] if self.left else None

    def interval_lines(self) -> list[str]:
        eps = float(self.epsilon)
        return [f"interval {i} {t!r} {t + eps!r}" for i, t in enumerate(self.left)]

    def verify(self, ds: DistanceMultiset) -> bool:
        """Re-check the certificate against ``ds`` from scratch."""
        if len(self.assignment) != len(ds):
            return False
        if sorted(set(self.assignment)) != list(range(self.k_used)):
            return False
        if list(self.left) != sorted(self.left):
            return False
        if self.exact:
            eps = Gap.of(self.epsilon)
            for sq, a in zip(ds.squared, self.assignment):
                t2 = self.left_squared[a]
                if sq < t2 or sign_sqrt_sum(sq, eps.lo, t2, eps.hi) > 0:
                    return False
            return True
        v = np.asarray(ds.values)
        t = np.asarray(self.left)[np.asarray(self.assignment, dtype=np.int64)]
        return bool(np.all(v >= t - self.tol) and np.all(v <= t + self.width))


def _report(ds: DistanceMultiset, line, eps, starts: list[int]) -> IntervalCoverReport:
    n = len(ds)
    assignment = np.zeros(n, dtype=np.int64)
    bounds = starts[1:] + [n]
    for idx, (s, e) in enumerate(zip(starts, bounds)):
        assignment[s:e] = idx
    if ds.exact:
        left_sq = tuple(ds.squared[s] for s in starts)
        left = tuple(float(np.sqrt(float(x))) for x in left_sq)
    else:
        left_sq = None
        left = tuple(float(ds.values[s]) for s in starts)
    return IntervalCoverReport(
        k_used=len(starts), epsilon=eps, exact=ds.exact, tol=0.0 if ds.exact else ds.tol,
        left=left, left_squared=left_sq, assignment=tuple(int(a) for a in assignment),
        pairs=ds.pairs,
    )


def min_intervals(ds: DistanceMultiset, eps) -> IntervalCoverReport:
    """Fewest closed width-``eps`` intervals covering every value of ``ds``."""
    eps = _coerce_eps(eps, ds.exact)
    line = _line(ds)
    return _report(ds, line, eps, _greedy_starts(line, eps))


def _feasible(line, eps, k: int) -> bool:
    return len(_greedy_starts(line, eps, limit=k)) <= k


def min_epsilon(ds: DistanceMultiset, k: int, seed: int = 0) -> IntervalCoverReport:
    """Smallest width for which ``k`` intervals cover ``ds``.

    ``seed`` only drives pivot choice; the result does not depend on it.
    """
    if k < 1:
        raise ValueError("k must be positive")
    line = _line(ds)
    if len(ds) == 0:
        return _report(ds, line, line.zero(), [])
    u = line.distinct()
    zero = u.zero()
    if _feasible(u, zero, k):
        return _report(ds, line, zero, _greedy_starts(line, zero))

    m = len(u)
    rows = np.arange(m - 1)
    lo = rows + 1
    hi = np.full(m - 1, m)
    rng = random.Random(seed)
    best = u.gap(0, m - 1)  # one interval spanning everything is always feasible
    while True:
        sizes = hi - lo
        total = int(sizes.sum())
        if total <= 0:
            break
        pick = rng.randrange(total)
        cum = np.cumsum(sizes)
        r = int(np.searchsorted(cum, pick, side="right"))
        offset = pick - (int(cum[r - 1]) if r > 0 else 0)
        col = int(lo[r]) + offset
        g = u.gap(r, col)
        if _feasible(u, g, k):
            best = g
            hi = np.minimum(hi, u.first_at_least(rows, g))
            hi[r] = min(hi[r], col)  # float rounding may keep the pivot otherwise
        else:
            lo = np.maximum(lo, u.first_above(rows, g))
            lo[r] = max(lo[r], col + 1)
        hi = np.maximum(hi, lo)
    return _report(ds, line, best, _greedy_starts(line, best))


@dataclass(frozen=True)
class NearlyResult:
    ok: bool
    report: IntervalCoverReport | None
    reason: str = ""

    def __bool__(self):
        return self.ok


def is_nearly_k_distance(ps: PointSet, k: int, eps, require_t_ge_1: bool = True) -> NearlyResult:
    """Whether every pairwise distance of ``ps`` lies in ``k`` width-``eps`` intervals.

    With ``require_t_ge_1`` the set must also be separated and the first
    interval must start at 1 or later.
    """
    if len(ps) == 0:
        raise ValueError("empty point set")
    if k < 1:
        raise ValueError("k must be positive")
    if len(ps) < 2:
        return NearlyResult(True, None, "fewer than two points")
    report = min_intervals(pairwise_distances(ps), eps)
    if report.k_used > k:
        return NearlyResult(False, report, f"needs {report.k_used} intervals of width {eps}")
    if require_t_ge_1:
        sep = is_separated(ps)
        if not sep:
            return NearlyResult(False, report, f"not separated: points {sep.witness}")
        t1_ok = report.left_squared[0] >= 1 if ps.is_exact else report.left[0] >= 1 - ps.tol
        if not t1_ok:
            return NearlyResult(False, report, f"t_1 = {report.left[0]} < 1")
    return NearlyResult(True, report)

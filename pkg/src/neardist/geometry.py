"""Point sets, pairwise distances and separation.

A :class:`PointSet` is either *exact* (coordinates are ``Fraction``) or
*floating* (coordinates are 64-bit floats, compared with an absolute
tolerance ``tol``). In exact mode squared distances are the primitive,
since square roots leave the rationals.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import gcd
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import pdist

from .surds import exact_sqrt, sqrt_enclosure

DEFAULT_TOL = 1e-9

EXACT = "exact"
FLOAT = "float"


def to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, (float, np.floating)):
        if not np.isfinite(x):
            raise ValueError(f"non-finite coordinate {x!r}")
        return Fraction(float(x))
    return Fraction(x)


class PointSet:
    """An immutable ordered list of distinct points in R^dim."""

    __slots__ = ("dim", "mode", "tol", "_coords", "_array")

    def __init__(self, points: Iterable[Sequence], dim: int | None = None,
                 mode: str = FLOAT, tol: float = DEFAULT_TOL, check: bool = True):
        if mode not in (EXACT, FLOAT):
            raise ValueError(f"unknown mode {mode!r}")
        if tol < 0:
            raise ValueError("tolerance must be nonnegative")
        rows = [tuple(p) for p in points]
        if dim is None:
            if not rows:
                raise ValueError("dim is required for an empty point set")
            dim = len(rows[0])
        if dim < 1:
            raise ValueError("dimension must be positive")
        for i, row in enumerate(rows):
            if len(row) != dim:
                raise ValueError(f"point {i} has {len(row)} coordinates, expected {dim}")

        object.__setattr__(self, "dim", int(dim))
        object.__setattr__(self, "mode", mode)
        object.__setattr__(self, "tol", float(tol))
        if mode == EXACT:
            coords = tuple(tuple(to_fraction(x) for x in row) for row in rows)
            arr = np.array([[float(x) for x in row] for row in coords], dtype=float)
        else:
            coords = None
            arr = np.array(rows, dtype=float) if rows else np.zeros((0, dim))
            if not np.all(np.isfinite(arr)):
                raise ValueError("non-finite coordinate")
        arr = arr.reshape(len(rows), dim)
        arr.setflags(write=False)
        object.__setattr__(self, "_coords", coords)
        object.__setattr__(self, "_array", arr)
        if check:
            dup = self._find_duplicate()
            if dup is not None:
                raise ValueError(f"points {dup[0]} and {dup[1]} coincide")

    def __setattr__(self, name, value):
        raise AttributeError("PointSet is immutable")

    @classmethod
    def exact(cls, points, dim=None, check=True) -> "PointSet":
        return cls(points, dim=dim, mode=EXACT, check=check)

    @classmethod
    def floating(cls, points, dim=None, tol=DEFAULT_TOL, check=True) -> "PointSet":
        return cls(points, dim=dim, mode=FLOAT, tol=tol, check=check)

    @property
    def is_exact(self) -> bool:
        return self.mode == EXACT

    @property
    def array(self) -> np.ndarray:
        """Float coordinates (an approximation in exact mode)."""
        return self._array

    @property
    def points(self) -> tuple:
        if self._coords is not None:
            return self._coords
        return tuple(tuple(float(x) for x in row) for row in self._array)

    def __len__(self) -> int:
        return self._array.shape[0]

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, i):
        if self._coords is not None:
            return self._coords[i]
        return tuple(float(x) for x in self._array[i])

    def __eq__(self, other) -> bool:
        if not isinstance(other, PointSet):
            return NotImplemented
        if (self.dim, self.mode, len(self)) != (other.dim, other.mode, len(other)):
            return False
        if self.is_exact:
            return self._coords == other._coords
        return bool(np.array_equal(self._array, other._array))

    def __hash__(self):
        return hash((self.dim, self.mode, self.points))

    def __repr__(self) -> str:
        return f"PointSet(dim={self.dim}, n={len(self)}, mode={self.mode})"

    def close_to(self, other: "PointSet", tol: float | None = None) -> bool:
        """Same size/dimension and coordinates equal within ``tol``."""
        tol = self.tol if tol is None else tol
        if self.dim != other.dim or len(self) != len(other):
            return False
        return bool(np.all(np.abs(self._array - other._array) <= tol))

    def subset(self, indices: Iterable[int]) -> "PointSet":
        idx = list(indices)
        if self.is_exact:
            return PointSet.exact([self._coords[i] for i in idx], dim=self.dim, check=False)
        return PointSet.floating(self._array[idx], dim=self.dim, tol=self.tol, check=False)

    def to_float(self, tol: float = DEFAULT_TOL) -> "PointSet":
        return PointSet.floating(self._array, dim=self.dim, tol=tol, check=False)

    def squared_distance(self, i: int, j: int):
        if self.is_exact:
            return sum((a - b) ** 2 for a, b in zip(self._coords[i], self._coords[j]))
        diff = self._array[i] - self._array[j]
        return float(diff @ diff)

    def distance(self, i: int, j: int) -> float:
        return float(np.sqrt(float(self.squared_distance(i, j))))

    def _find_duplicate(self):
        n = len(self)
        if n < 2:
            return None
        if self.is_exact:
            seen = {}
            for i, row in enumerate(self._coords):
                if row in seen:
                    return seen[row], i
                seen[row] = i
            return None
        pairs = cKDTree(self._array).query_pairs(r=self.tol, output_type="ndarray")
        if len(pairs) == 0:
            return None
        pairs = np.sort(pairs, axis=1)
        first = np.lexsort((pairs[:, 1], pairs[:, 0]))[0]
        return int(pairs[first, 0]), int(pairs[first, 1])


class DistanceMultiset:
    """Sorted pairwise distances with the index pair each one came from.

    In exact mode the values are held as exact squared distances; ``values``
    then gives float approximations and :meth:`enclosures` certified
    rational brackets of the true distances.
    """

    __slots__ = ("exact", "tol", "squared", "values", "pairs")

    def __init__(self, squared, pairs=None, exact: bool = False, tol: float = DEFAULT_TOL):
        self.exact = bool(exact)
        self.tol = float(tol)
        if self.exact:
            sq = [to_fraction(s) for s in squared]
            order = sorted(range(len(sq)), key=sq.__getitem__)
            self.squared = tuple(sq[i] for i in order)
            self.values = np.sqrt(np.array([float(s) for s in self.squared], dtype=float))
        else:
            sq = np.asarray(squared, dtype=float).ravel()
            order = np.argsort(sq, kind="stable")
            self.squared = sq[order]
            self.values = np.sqrt(self.squared)
            self.squared.setflags(write=False)
        if len(self.squared) and self.squared[0] < 0:
            raise ValueError("negative squared distance")
        self.values.setflags(write=False)
        if pairs is None:
            self.pairs = None
        else:
            p = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
            if len(p) != len(order):
                raise ValueError("pairs and values differ in length")
            self.pairs = p[np.asarray(order, dtype=np.int64)] if len(p) else p
            self.pairs.setflags(write=False)

    @classmethod
    def from_values(cls, values, exact: bool = False, tol: float = DEFAULT_TOL):
        """Build from (unsquared) distances, e.g. for a hand-written list."""
        vals = list(values)
        if any(v < 0 for v in vals):
            raise ValueError("distances must be nonnegative")
        if exact:
            return cls([to_fraction(v) ** 2 for v in vals], exact=True, tol=tol)
        return cls(np.asarray(vals, dtype=float) ** 2, exact=False, tol=tol)

    def __len__(self) -> int:
        return len(self.squared)

    def __repr__(self) -> str:
        mode = EXACT if self.exact else FLOAT
        return f"DistanceMultiset(n={len(self)}, mode={mode})"

    def scaled(self, factor) -> "DistanceMultiset":
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        if self.exact:
            f2 = to_fraction(factor) ** 2
            sq = [s * f2 for s in self.squared]
        else:
            sq = np.asarray(self.squared) * float(factor) ** 2
        return DistanceMultiset(sq, pairs=self.pairs, exact=self.exact, tol=self.tol)

    def exact_values(self) -> list[Fraction | None]:
        """True distances where they are rational (exact mode only)."""
        if not self.exact:
            raise ValueError("exact values need an exact multiset")
        return [exact_sqrt(s) for s in self.squared]

    def enclosures(self, bits: int = 64) -> list[tuple[Fraction, Fraction]]:
        if not self.exact:
            raise ValueError("enclosures need an exact multiset")
        return [sqrt_enclosure(s, bits) for s in self.squared]

    def distinct_count(self) -> int:
        """Number of distinct values (exact, or up to ``tol`` chaining in float mode)."""
        if len(self) == 0:
            return 0
        if self.exact:
            return len(set(self.squared))
        gaps = np.diff(self.values)
        return int(1 + np.count_nonzero(gaps > self.tol))


def _integer_squared(ps: PointSet, pairs: np.ndarray) -> DistanceMultiset | None:
    """Exact squared distances through int64 arithmetic when the scaled values fit."""
    denom = 1
    for row in ps.points:
        for x in row:
            denom = denom * x.denominator // gcd(denom, x.denominator)
    ints = [[int(x * denom) for x in row] for row in ps.points]
    lows = [min(col) for col in zip(*ints)]
    span = max(max(col) - lo for col, lo in zip(zip(*ints), lows))
    if span * span * ps.dim >= 2**62:
        return None
    arr = np.array([[x - lo for x, lo in zip(row, lows)] for row in ints], dtype=np.int64)
    diff = arr[pairs[:, 0]] - arr[pairs[:, 1]]
    sq = np.einsum("ij,ij->i", diff, diff)
    order = np.argsort(sq, kind="stable")
    sq = sq[order]
    scale = denom * denom
    lookup = {int(v): Fraction(int(v), scale) for v in np.unique(sq)}
    out = object.__new__(DistanceMultiset)
    out.exact, out.tol = True, float(ps.tol)
    out.squared = tuple(lookup[v] for v in sq.tolist())
    out.values = np.sqrt(sq.astype(float) / scale)
    out.values.setflags(write=False)
    out.pairs = pairs[order]
    out.pairs.setflags(write=False)
    return out


def pairwise_distances(ps: PointSet) -> DistanceMultiset:
    n = len(ps)
    if n < 2:
        raise ValueError("degenerate set: need at least 2 points")
    pairs = np.column_stack(np.triu_indices(n, 1)).astype(np.int64)
    if ps.is_exact:
        fast = _integer_squared(ps, pairs)
        if fast is not None:
            return fast
        sq = [ps.squared_distance(int(i), int(j)) for i, j in pairs]
        return DistanceMultiset(sq, pairs=pairs, exact=True, tol=ps.tol)
    sq = pdist(ps.array, "sqeuclidean")
    return DistanceMultiset(sq, pairs=pairs, exact=False, tol=ps.tol)


@dataclass(frozen=True)
class Separation:
    separated: bool
    witness: tuple[int, int] | None = None
    distance: float | None = None

    def __bool__(self) -> bool:
        return self.separated


def is_separated(ps: PointSet) -> Separation:
    """All pairwise distances at least 1 (at least ``1 - tol`` in float mode).

    On failure the witness is the lexicographically first offending pair.
    """
    n = len(ps)
    if n < 2:
        return Separation(True)
    if ps.is_exact:
        for i, j in combinations(range(n), 2):
            d2 = ps.squared_distance(i, j)
            if d2 < 1:
                return Separation(False, (i, j), float(np.sqrt(float(d2))))
        return Separation(True)
    radius = np.nextafter(1.0 - ps.tol, 0.0)
    pairs = cKDTree(ps.array).query_pairs(r=radius, output_type="ndarray")
    if len(pairs) == 0:
        return Separation(True)
    pairs = np.sort(pairs, axis=1)
    k = np.lexsort((pairs[:, 1], pairs[:, 0]))[0]
    i, j = int(pairs[k, 0]), int(pairs[k, 1])
    return Separation(False, (i, j), ps.distance(i, j))


def rescale(ps: PointSet, factor) -> PointSet:
    if factor <= 0:
        raise ValueError("scale factor must be positive")
    if ps.is_exact:
        f = to_fraction(factor)
        return PointSet.exact([[x * f for x in row] for row in ps.points], dim=ps.dim, check=False)
    return PointSet.floating(ps.array * float(factor), dim=ps.dim, tol=ps.tol, check=False)


def translate(ps: PointSet, offset) -> PointSet:
    if ps.is_exact:
        off = [to_fraction(x) for x in offset]
        return PointSet.exact([[x + o for x, o in zip(row, off)] for row in ps.points],
                              dim=ps.dim, check=False)
    return PointSet.floating(ps.array + np.asarray(offset, dtype=float), dim=ps.dim,
                             tol=ps.tol, check=False)


def min_distance(ps: PointSet) -> float:
    n = len(ps)
    if n < 2:
        raise ValueError("degenerate set: need at least 2 points")
    if ps.is_exact:
        return float(np.sqrt(float(min(ps.squared_distance(i, j)
                                       for i, j in combinations(range(n), 2)))))
    dist, _ = cKDTree(ps.array).query(ps.array, k=2)
    return float(dist[:, 1].min())


def normalize_min_distance(ps: PointSet) -> PointSet:
    """Rescale so the smallest distance is 1.

    Exact mode requires the smallest distance to be rational.
    """
    if ps.is_exact:
        n = len(ps)
        if n < 2:
            raise ValueError("degenerate set: need at least 2 points")
        d2 = min(ps.squared_distance(i, j) for i, j in combinations(range(n), 2))
        d = exact_sqrt(d2)
        if d is None:
            raise ValueError("minimum distance is irrational; use floating mode")
        return rescale(ps, 1 / d)
    return rescale(ps, 1.0 / min_distance(ps))


def embed(ps: PointSet, dim: int) -> PointSet:
    """Pad every point with zeros up to ``dim`` coordinates."""
    if dim < ps.dim:
        raise ValueError("cannot embed into a smaller dimension")
    pad = dim - ps.dim
    if ps.is_exact:
        return PointSet.exact([row + (Fraction(0),) * pad for row in ps.points], dim=dim,
                              check=False)
    arr = np.hstack([ps.array, np.zeros((len(ps), pad))])
    return PointSet.floating(arr, dim=dim, tol=ps.tol, check=False)


def apply_affine(ps: PointSet, matrix, offset=None) -> PointSet:
    """Float image ``x -> matrix @ x + offset`` (used for rigid motions)."""
    m = np.asarray(matrix, dtype=float)
    arr = ps.array @ m.T
    if offset is not None:
        arr = arr + np.asarray(offset, dtype=float)
    return PointSet.floating(arr, dim=m.shape[0], tol=ps.tol, check=False)

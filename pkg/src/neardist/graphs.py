"""Distance graphs: pair counting, exact maximum cliques, two-scale clique partitions."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product

import numpy as np

from .geometry import PointSet, to_fraction

CLIQUE_LIMIT = 64
_BLOCK = 256


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("NEARDIST_THREADS", "1")))
    except ValueError:
        return 1


def merge_intervals(intervals) -> list[tuple]:
    """Sort and merge closed intervals given as (t, w) into (lo, hi) pairs."""
    spans = []
    for t, w in intervals:
        if w < 0:
            raise ValueError("interval width must be nonnegative")
        spans.append((t, t + w))
    spans.sort()
    merged = []
    for lo, hi in spans:
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return merged


@dataclass(frozen=True, eq=False)
class DistanceGraph:
    """Pairs of ``points`` whose distance lies in the union of ``intervals``."""

    points: PointSet
    intervals: tuple  # merged (lo, hi)
    edges: np.ndarray  # (m, 2), i < j, lexicographically sorted

    @property
    def n(self) -> int:
        return len(self.points)

    def __len__(self):
        return len(self.edges)

    def adjacency(self) -> list[int]:
        """Neighbourhoods as integer bitsets."""
        adj = [0] * self.n
        for i, j in self.edges:
            adj[i] |= 1 << int(j)
            adj[j] |= 1 << int(i)
        return adj


class _Membership:
    def __init__(self, ps: PointSet, spans):
        self.exact = ps.is_exact
        if self.exact:
            self.lo2 = [to_fraction(lo) ** 2 if lo > 0 else Fraction(0) for lo, _ in spans]
            self.hi2 = [to_fraction(hi) ** 2 for _, hi in spans]
            self.ps = ps
        else:
            tol = ps.tol
            self.lo = np.array([float(lo) - tol for lo, _ in spans])
            self.hi = np.array([float(hi) + tol for _, hi in spans])

    def mask(self, dist: np.ndarray) -> np.ndarray:
        if len(self.hi) == 0:
            return np.zeros(dist.shape, dtype=bool)
        k = np.searchsorted(self.lo, dist, side="right") - 1
        ok = k >= 0
        kk = np.clip(k, 0, None)
        return ok & (dist <= self.hi[kk])

    def exact_member(self, i: int, j: int) -> bool:
        d2 = self.ps.squared_distance(i, j)
        return any(lo <= d2 <= hi for lo, hi in zip(self.lo2, self.hi2))


def _naive_block(arr, member, start, stop):
    n = len(arr)
    out = []
    for i in range(start, stop):
        if i + 1 >= n:
            continue
        d = np.sqrt(np.sum((arr[i + 1:] - arr[i]) ** 2, axis=1))
        js = np.flatnonzero(member.mask(d)) + i + 1
        out.append(np.column_stack([np.full(len(js), i), js]))
    return np.vstack(out) if out else np.zeros((0, 2), dtype=np.int64)


def _exact_pairs(ps, member, candidates):
    keep = [(i, j) for i, j in candidates if member.exact_member(i, j)]
    return np.array(keep, dtype=np.int64).reshape(-1, 2)


def _naive(ps: PointSet, member) -> np.ndarray:
    n = len(ps)
    if ps.is_exact:
        return _exact_pairs(ps, member, combinations(range(n), 2))
    arr = ps.array
    blocks = [(s, min(s + _BLOCK, n)) for s in range(0, n, _BLOCK)]
    workers = min(_threads(), len(blocks)) or 1
    if workers == 1:
        parts = [_naive_block(arr, member, s, e) for s, e in blocks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: _naive_block(arr, member, *b), blocks))
    parts = [p for p in parts if len(p)]
    return np.vstack(parts).astype(np.int64) if parts else np.zeros((0, 2), dtype=np.int64)


def _grid_candidates(arr: np.ndarray, cell: float):
    """Pairs (i < j) in the same or adjacent grid cells."""
    keys = np.floor(arr / cell).astype(np.int64)
    buckets: dict = {}
    for idx, key in enumerate(map(tuple, keys)):
        buckets.setdefault(key, []).append(idx)
    offsets = list(product((-1, 0, 1), repeat=arr.shape[1]))
    for key, members in buckets.items():
        own = np.array(members, dtype=np.int64)
        for off in offsets:
            other = buckets.get(tuple(a + b for a, b in zip(key, off)))
            if other is None:
                continue
            yield own, np.array(other, dtype=np.int64)


def _grid(ps: PointSet, member, reach: float) -> np.ndarray:
    arr = ps.array
    cell = reach * (1 + 1e-9) + ps.tol + 1e-12
    found = []
    for own, other in _grid_candidates(arr, cell):
        ii, jj = np.meshgrid(own, other, indexing="ij")
        ii, jj = ii.ravel(), jj.ravel()
        sel = ii < jj
        ii, jj = ii[sel], jj[sel]
        if not len(ii):
            continue
        if ps.is_exact:
            pairs = _exact_pairs(ps, member, zip(ii.tolist(), jj.tolist()))
        else:
            d = np.sqrt(np.sum((arr[ii] - arr[jj]) ** 2, axis=1))
            m = member.mask(d)
            pairs = np.column_stack([ii[m], jj[m]])
        if len(pairs):
            found.append(pairs)
    return np.vstack(found).astype(np.int64) if found else np.zeros((0, 2), dtype=np.int64)


def pair_count(ps: PointSet, intervals, method: str = "naive") -> tuple[int, DistanceGraph]:
    """Number of pairs whose distance lies in the union of closed intervals.

    ``intervals`` are (t, w) pairs meaning [t, t + w]; overlaps are merged so
    each pair counts once. ``method="grid"`` buckets points into cells whose
    side is the largest right endpoint and must agree with the naive scan.
    """
    if method not in ("naive", "grid"):
        raise ValueError("method must be 'naive' or 'grid'")
    spans = merge_intervals(intervals)
    member = _Membership(ps, spans)
    if len(ps) < 2 or not spans:
        edges = np.zeros((0, 2), dtype=np.int64)
    elif method == "grid":
        edges = _grid(ps, member, float(spans[-1][1]))
    else:
        edges = _naive(ps, member)
    if len(edges):
        edges = edges[np.lexsort((edges[:, 1], edges[:, 0]))]
    edges.setflags(write=False)
    return len(edges), DistanceGraph(ps, tuple(spans), edges)


# --- maximum clique -------------------------------------------------------


def _as_bitsets(graph) -> list[int]:
    if isinstance(graph, DistanceGraph):
        return graph.adjacency()
    if isinstance(graph, np.ndarray):
        m = np.asarray(graph, dtype=bool)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("adjacency matrix must be square")
        adj = []
        for i in range(len(m)):
            row = 0
            for j in np.flatnonzero(m[i]):
                if j != i:
                    row |= 1 << int(j)
            adj.append(row)
    else:
        rows = list(graph)
        adj = []
        for i, nbrs in enumerate(rows):
            if isinstance(nbrs, int):
                adj.append(nbrs & ~(1 << i))
            else:
                row = 0
                for j in nbrs:
                    if j != i:
                        row |= 1 << int(j)
                adj.append(row)
    for i, row in enumerate(adj):
        for j in _bits(row):
            if not adj[j] >> i & 1:
                raise ValueError(f"adjacency is not symmetric at ({i}, {j})")
    return adj


def _bits(x: int):
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


def _color_bound(cand: int, adj: list[int]) -> int:
    """Greedy colouring size of the candidate set: an upper bound on its clique number."""
    colors = 0
    rest = cand
    while rest:
        colors += 1
        avail = rest
        while avail:
            v = (avail & -avail).bit_length() - 1
            rest &= ~(1 << v)
            avail &= ~(1 << v) & ~adj[v]
    return colors


def max_clique(graph, limit: int = CLIQUE_LIMIT) -> tuple[int, ...]:
    """A maximum clique; among those, the lexicographically smallest index tuple.

    ``graph`` is a DistanceGraph, a boolean adjacency matrix, or a list of
    neighbour collections (or bitsets).
    """
    adj = _as_bitsets(graph)
    n = len(adj)
    if n > limit:
        raise ValueError(f"{n} vertices exceeds the exact clique budget of {limit}; "
                         "use a heuristic or a smaller instance")
    if n == 0:
        return ()
    best: list = [()]
    above = [~((1 << (v + 1)) - 1) for v in range(n)]

    def expand(clique: tuple, cand: int):
        if not cand:
            if len(clique) > len(best[0]):
                best[0] = clique
            return
        if len(clique) + _color_bound(cand, adj) <= len(best[0]):
            return
        rest = cand
        while rest:
            if len(clique) + bin(rest).count("1") <= len(best[0]):
                return
            v = (rest & -rest).bit_length() - 1
            rest &= ~(1 << v)
            expand(clique + (v,), cand & adj[v] & above[v])

    expand((), (1 << n) - 1)
    return best[0]


# --- clique partition -----------------------------------------------------


@dataclass(frozen=True)
class CliquePartition:
    blue: tuple               # B, ascending indices
    red: tuple                # R_i as ascending index tuples; red[i] contains blue[i]

    def check(self, n: int, is_red) -> list[str]:
        """Invariant violations (empty when the partition is valid)."""
        problems = []
        seen = [x for r in self.red for x in r]
        if sorted(seen) != list(range(n)):
            problems.append("red cliques do not partition the vertex set")
        for b, r in zip(self.blue, self.red):
            hits = [x for x in r if x in self.blue]
            if hits != [b]:
                problems.append(f"red clique {r} meets B in {hits}")
            for x, y in combinations(r, 2):
                if not is_red(x, y):
                    problems.append(f"red clique {r} has blue pair ({x}, {y})")
        for a in range(len(self.red)):
            for b in range(a + 1, len(self.red)):
                for x in self.red[a]:
                    for y in self.red[b]:
                        if is_red(x, y):
                            problems.append(f"cross pair ({x}, {y}) is red")
        return problems


class HypothesisError(ValueError):
    def __init__(self, message, red_pair=None, blue_pair=None):
        super().__init__(message)
        self.red_pair, self.blue_pair = red_pair, blue_pair


def partition_from_coloring(n: int, red_matrix, limit: int = CLIQUE_LIMIT) -> CliquePartition:
    """Clique partition for a colouring supplied directly (``red_matrix[i][j]`` true if red).

    B is a maximum blue clique and R_i is b_i with its red neighbours. The
    result is verified and a ValueError raised if the colouring does not
    admit this partition.
    """
    red = np.asarray(red_matrix, dtype=bool)
    if red.shape != (n, n) or not np.array_equal(red, red.T):
        raise ValueError("red matrix must be symmetric n x n")
    blue_adj = ~red
    np.fill_diagonal(blue_adj, False)
    blue = max_clique(blue_adj, limit=limit) if n else ()
    parts = tuple(tuple(sorted({b} | set(np.flatnonzero(red[b]).tolist()))) for b in blue)
    result = CliquePartition(tuple(blue), parts)
    problems = result.check(n, lambda x, y: bool(red[x, y]))
    if problems:
        raise ValueError("colouring does not admit a clique partition: " + problems[0])
    return result


def clique_partition(ps: PointSet, threshold, limit: int = CLIQUE_LIMIT) -> CliquePartition:
    """Partition into red cliques (distance < threshold) around a maximum blue clique.

    Requires every blue distance to exceed three times every red distance;
    otherwise raises HypothesisError naming the offending pair.
    """
    n = len(ps)
    if n == 0:
        return CliquePartition((), ())
    if ps.is_exact:
        t2 = to_fraction(threshold) ** 2
        sq = [[ps.squared_distance(i, j) if i != j else Fraction(0) for j in range(n)]
              for i in range(n)]
        red = np.array([[i != j and sq[i][j] < t2 for j in range(n)] for i in range(n)])
        dist = np.sqrt(np.array([[float(x) for x in row] for row in sq]))
    else:
        arr = ps.array
        dist = np.sqrt(((arr[:, None, :] - arr[None, :, :]) ** 2).sum(axis=2))
        red = dist < float(threshold)
        np.fill_diagonal(red, False)
        sq = None
    iu = np.triu_indices(n, 1)
    red_u = red[iu]
    if red_u.any() and (~red_u).any():
        rd = np.where(red_u, dist[iu], -np.inf)
        bd = np.where(~red_u, dist[iu], np.inf)
        r, b = int(np.argmax(rd)), int(np.argmin(bd))
        rp = (int(iu[0][r]), int(iu[1][r]))
        bp = (int(iu[0][b]), int(iu[1][b]))
        if sq is not None:
            violated = sq[bp[0]][bp[1]] <= 9 * sq[rp[0]][rp[1]]
        else:
            violated = bd[b] <= 3 * rd[r]
        if violated:
            raise HypothesisError(
                f"blue pair {bp} at distance {bd[b]:.6g} is not more than 3 times "
                f"red pair {rp} at distance {rd[r]:.6g}", rp, bp)
    if n <= limit:
        return partition_from_coloring(n, red, limit)
    # under the hypothesis red is an equivalence relation and the blue graph is
    # complete multipartite: a maximum blue clique takes one vertex per class
    label = [-1] * n
    classes = []
    for v in range(n):
        if label[v] < 0:
            members = [v] + [int(u) for u in np.flatnonzero(red[v]) if u > v]
            for u in members:
                label[u] = len(classes)
            classes.append(tuple(sorted(members)))
    result = CliquePartition(tuple(c[0] for c in classes), tuple(classes))
    problems = result.check(n, lambda x, y: bool(red[x, y]))
    if problems:
        raise ValueError(problems[0])
    return result

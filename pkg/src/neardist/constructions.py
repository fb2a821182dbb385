"""Explicit point-set constructions with the parameters they claim.

Every generator returns a :class:`Construction`: the points plus a
:class:`ConstructionSpec` recording what should be verifiable about them
(number of intervals, achieved width, flatness, expected pair counts).
``self_check`` re-verifies those claims with the independent checkers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product

import numpy as np

from .bounds import turan_T, turan_part_sizes
from .geometry import (DEFAULT_TOL, PointSet, embed, is_separated, min_distance,
                       normalize_min_distance, pairwise_distances)
from .interval_cover import is_nearly_k_distance, min_epsilon

DEFAULT_SCALE = 1e6


@dataclass(frozen=True)
class ConstructionSpec:
    name: str
    params: dict
    k_claimed: int | None = None
    eps_claimed: float | None = None      # width the set is asserted to achieve
    eps_achieved: float | None = None     # min_epsilon(points, k_claimed)
    flat: tuple | None = None             # (kind, d, alpha) expected to certify
    not_flat: tuple | None = None         # (kind, d, alpha) expected to be refused
    intervals: tuple = ()                 # ((t, w), ...) for pair counting
    expected_pairs: int | None = None


@dataclass(frozen=True)
class Construction:
    points: PointSet
    spec: ConstructionSpec
    extra: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    lines: tuple  # ("item", passed, detail)

    def __bool__(self):
        return self.ok


def self_check(c: Construction) -> CheckResult:
    """Re-verify every claim in ``c.spec``; each claim yields one result line."""
    from .flatness import certify_flatness
    from .graphs import pair_count

    ps, spec = c.points, c.spec
    lines = []
    if len(ps) >= 2:
        sep = is_separated(ps)
        lines.append(("separated", bool(sep), "" if sep else f"pair {sep.witness}"))
    if spec.k_claimed is not None and spec.eps_claimed is not None and len(ps) >= 2:
        res = is_nearly_k_distance(ps, spec.k_claimed, spec.eps_claimed)
        achieved = float(min_epsilon(pairwise_distances(ps), spec.k_claimed).epsilon)
        lines.append((f"nearly-{spec.k_claimed}-distance", bool(res),
                      f"eps={spec.eps_claimed:g} min_epsilon={achieved:.6g}"
                      + ("" if res else f" ({res.reason})")))
    if spec.flat is not None:
        kind, d, alpha = spec.flat
        cert = certify_flatness(ps, d, alpha, kind)
        lines.append((f"{kind}-flat d={d}", bool(cert),
                      f"alpha={alpha:g} max_angle={cert.max_angle:.6g}"))
    if spec.not_flat is not None:
        kind, d, alpha = spec.not_flat
        cert = certify_flatness(ps, d, alpha, kind)
        lines.append((f"not {kind}-flat d={d}", not cert,
                      f"alpha={alpha:g} max_angle={cert.max_angle:.6g}"))
    if spec.expected_pairs is not None:
        count, _ = pair_count(ps, list(spec.intervals))
        lines.append(("pair-count", count == spec.expected_pairs,
                      f"count={count} expected={spec.expected_pairs}"))
    return CheckResult(all(ok for _, ok, _ in lines), tuple(lines))


# --- basic factors --------------------------------------------------------


def arithmetic_progression(length: int, exact: bool = True) -> PointSet:
    """``length`` collinear points with unit spacing: a (length-1)-distance set in R^1."""
    if length < 1:
        raise ValueError("length must be positive")
    rows = [[Fraction(i)] for i in range(length)]
    return PointSet.exact(rows) if exact else PointSet.floating([[float(i)] for i in range(length)])


def regular_polygon(m: int, side: float = 1.0) -> PointSet:
    """Regular m-gon in R^2 with the given side length."""
    if m < 3:
        raise ValueError("a polygon needs at least 3 vertices")
    radius = side / (2 * np.sin(np.pi / m))
    ang = 2 * np.pi * np.arange(m) / m
    return PointSet.floating(np.column_stack([radius * np.cos(ang), radius * np.sin(ang)]))


def hypercube_slice(d: int, k: int) -> PointSet:
    """0/1 vectors of length d+1 with exactly k ones, in exact arithmetic.

    They lie on the hyperplane sum(x) = k, so this is a d-dimensional set.
    """
    if not 1 <= k <= d + 1:
        raise ValueError(f"need 1 <= k <= d+1, got k={k}, d={d}")
    rows = []
    for ones in combinations(range(d + 1), k):
        row = [Fraction(0)] * (d + 1)
        for i in ones:
            row[i] = Fraction(1)
        rows.append(row)
    ps = PointSet.exact(rows, dim=d + 1, check=False)
    if len(ps) >= 2:
        distinct = pairwise_distances(ps).distinct_count()
        assert distinct <= k, f"hypercube slice has {distinct} distances"
    return ps


def _hyperplane_frame(dim: int) -> np.ndarray:
    """Orthonormal basis (rows) of the hyperplane sum(x) = 0 in R^dim."""
    ones = np.ones((1, dim)) / np.sqrt(dim)
    _, _, vt = np.linalg.svd(ones, full_matrices=True)
    return vt[1:]


def project_slice(ps: PointSet) -> PointSet:
    """Isometric image of a hypercube slice in R^d (drops the constant-sum direction)."""
    frame = _hyperplane_frame(ps.dim)
    arr = ps.array @ frame.T
    return PointSet.floating(arr, dim=ps.dim - 1, check=False)


def factor_set(k: int, d: int) -> PointSet:
    """Registered k-distance factor in R^d, normalized to minimum distance 1."""
    if k < 1 or d < 1:
        raise ValueError("k and d must be positive")
    if d == 1:
        return arithmetic_progression(k + 1)
    if (k, d) == (2, 2):
        return regular_polygon(5)
    if k > d + 1:
        raise ValueError(f"no registered generator for k={k}, d={d}")
    ps = project_slice(hypercube_slice(d, k))
    return normalize_min_distance(ps)


# --- product construction -------------------------------------------------


def _diameter(ps: PointSet) -> float:
    if len(ps) < 2:
        return 0.0
    return float(np.sqrt(float(pairwise_distances(ps).squared[-1])))


def _level_scales(factors, eps, scale_ratio) -> list[float]:
    if scale_ratio is not None:
        return [float(scale_ratio) ** i for i in range(len(factors))]
    # each level's cluster spread L^2 / (2 s_i dmin_i) stays below eps/2,
    # where L bounds the contribution of all smaller levels
    scales, reach = [], 0.0
    for f in factors:
        dmin = min_distance(f) if len(f) >= 2 else 1.0
        s = 1.0 if not scales else max(reach * reach / (eps * dmin), 2 * reach / dmin, scales[-1])
        scales.append(s)
        reach += s * _diameter(f)
    return scales


def product_construction(specs, eps: float | None = None,
                         scale_ratio: float | None = None) -> Construction:
    """Cartesian product of registered factors at geometrically separated scales.

    ``specs`` is a list of (k_i, d_i). With ``scale_ratio`` R the i-th factor
    (from 0) is scaled by R^i; otherwise scales are chosen from ``eps``. With
    neither, R defaults to 1e6. The result has minimum distance 1 and is
    asserted to be nearly (sum k_i)-distance at width ``eps`` when given.
    """
    specs = [tuple(s) for s in specs]
    if not specs:
        raise ValueError("need at least one factor")
    if eps is not None and eps <= 0:
        raise ValueError("eps must be positive")
    if eps is None and scale_ratio is None:
        scale_ratio = DEFAULT_SCALE
    factors = [factor_set(k, d) for k, d in specs]
    k_total = sum(k for k, _ in specs)
    params = {"factors": specs, "eps": eps, "scale_ratio": scale_ratio}
    if len(factors) == 1:
        ps = factors[0]
    else:
        scales = _level_scales(factors, eps, scale_ratio)
        blocks = [f.array * s for f, s in zip(factors, scales)]
        rows = [np.concatenate(parts) for parts in product(*blocks)]
        ps = normalize_min_distance(PointSet.floating(rows, check=False))
        params["scales"] = tuple(scales)
    achieved = float(min_epsilon(pairwise_distances(ps), k_total).epsilon) if len(ps) > 1 else 0.0
    if eps is not None:
        res = is_nearly_k_distance(ps, k_total, eps)
        if not res:
            raise ValueError(f"product is not nearly {k_total}-distance at eps={eps}: {res.reason}")
    spec = ConstructionSpec("product", params, k_total,
                            eps if eps is not None else max(achieved, DEFAULT_TOL), achieved)
    return Construction(ps, spec)


# --- extension construction ----------------------------------------------


def _common_normal(base: PointSet) -> tuple[PointSet, np.ndarray]:
    """Base placed in a hyperplane together with a unit normal to it."""
    arr = base.array
    if len(arr) >= 2:
        diffs = arr[1:] - arr[0]
        _, s, vt = np.linalg.svd(diffs, full_matrices=True)
        rank = int(np.count_nonzero(s > 1e-9 * max(1.0, float(s[0]))))
    else:
        vt, rank = np.eye(base.dim), 0
    if rank >= base.dim:
        base = embed(base, base.dim + 1)
        return base, np.eye(base.dim)[-1]
    return base, vt[-1]


def _distinct_values(values: np.ndarray, tol: float) -> list[float]:
    out = []
    for v in np.sort(values):
        if not out or v - out[-1] > tol * max(1.0, v):
            out.append(float(v))
    return out


def extension_construction(base: PointSet, n: int, t1: float | None = None,
                           normals=None) -> Construction:
    """Replace each base point by an arithmetic progression along a normal.

    The base is scaled so its minimum distance is ``t1`` (default 2n^2+1)
    and part sizes follow the Turán partition of n into |base| parts, so the
    pairs whose length is within 1/2 of a base distance number T(n, |base|).
    """
    nb = len(base)
    if n < nb:
        raise ValueError("n must be at least the base size")
    if t1 is None:
        t1 = 2 * n * n + 1
    if t1 <= 2 * n * n:
        raise ValueError(f"t1 must exceed 2n^2 = {2 * n * n}")
    base = base.to_float() if base.is_exact else base
    if normals is None:
        base, m = _common_normal(base)
        normals = np.tile(m, (nb, 1))
    else:
        normals = np.asarray(normals, dtype=float)
        if normals.shape != (nb, base.dim):
            raise ValueError("need one normal per base point")
        normals = normals / np.linalg.norm(normals, axis=1)[:, None]
    arr = base.array
    if nb >= 2:
        arr = arr * (t1 / min_distance(base))
    sizes = turan_part_sizes(n, nb)
    rows, part = [], []
    for v, (p, size) in enumerate(zip(arr, sizes)):
        for t in range(1, size + 1):
            rows.append(p + t * normals[v])
            part.append(v)
    ps = PointSet.floating(rows, check=False)
    sep = is_separated(ps)
    if not sep:
        raise ValueError(f"extension is not separated: points {sep.witness}")
    intervals = ()
    if nb >= 2:
        dists = _distinct_values(np.sqrt(pairwise_distances(PointSet.floating(arr)).squared), 1e-9)
        intervals = tuple((D - 0.5, 1.0) for D in dists)
    spec = ConstructionSpec(
        "extension", {"n": n, "t1": t1, "base_size": nb},
        k_claimed=len(intervals) or None,
        intervals=intervals, expected_pairs=turan_T(n, nb),
    )
    return Construction(ps, spec, {"parts": tuple(part), "sizes": tuple(sizes)})


# --- small named examples -------------------------------------------------


def rhombus_triangle(K: float = DEFAULT_SCALE, eps: float = 1e-3) -> Construction:
    """Equilateral triangle of side K with a unit 60/120-degree rhombus at each vertex.

    At each vertex the rhombus sides run perpendicular to the two triangle
    sides meeting there, pointing away from the triangle.
    """
    if K < 1e3:
        raise ValueError("K must be at least 1e3")
    tri = np.array([[0.0, 0.0], [K, 0.0], [K / 2, K * np.sqrt(3) / 2]])
    centre = tri.mean(axis=0)
    rows = []
    for i in range(3):
        p = tri[i]
        normals = []
        for j in range(3):
            if j == i:
                continue
            side = tri[j] - p
            nrm = np.array([-side[1], side[0]]) / np.linalg.norm(side)
            if nrm @ (p - centre) < 0:
                nrm = -nrm
            normals.append(nrm)
        n1, n2 = normals
        rows += [p, p + n1, p + n2, p + n1 + n2]
    ps = PointSet.floating(rows)
    ps = normalize_min_distance(ps)
    achieved = float(min_epsilon(pairwise_distances(ps), 5).epsilon)
    if achieved > eps:
        raise ValueError(f"min_epsilon for 5 intervals is {achieved:.6g}, above eps={eps:g} "
                         f"(K={K:g})")
    spec = ConstructionSpec("rhombus-triangle", {"K": K}, 5, eps, achieved)
    return Construction(ps, spec)


def nonglobal_flat_example(K: float = 1e4) -> Construction:
    """Six points in R^4: a triangle of side K and a unit offset at each vertex.

    The offsets are orthogonal to the triangle's plane; the first two are
    orthogonal to each other and the third bisects them.
    """
    if K < 1e3:
        raise ValueError("K must be at least 1e3")
    e = np.eye(4)
    p = [np.zeros(4), K * e[0], K / 2 * e[0] + K * np.sqrt(3) / 2 * e[1]]
    u = [e[2], e[3], (e[2] + e[3]) / np.sqrt(2)]
    rows = p + [pi - ui for pi, ui in zip(p, u)]
    ps = PointSet.floating(rows)
    spec = ConstructionSpec("nonglobal-flat", {"K": K}, 2, 1e-2,
                            float(min_epsilon(pairwise_distances(ps), 2).epsilon),
                            flat=("uniform", 3, 0.01), not_flat=("global", 3, float(np.pi / 6)))
    return Construction(ps, spec)


def separated_plane_example(k: int, n: int) -> Construction:
    """Two columns {0, k^2} x {1..n}: all n^2 cross distances lie in [k^2, k^2+1]."""
    if k < 2 or n < 1:
        raise ValueError("need k >= 2 and n >= 1")
    if (n - 1) ** 2 > 2 * k * k + 1:
        raise ValueError(f"n={n} too large for k={k}: need (n-1)^2 <= 2k^2+1")
    rows = [[Fraction(x), Fraction(y)] for x in (0, k * k) for y in range(1, n + 1)]
    ps = PointSet.exact(rows)
    spec = ConstructionSpec("separated-plane", {"k": k, "n": n},
                            intervals=((k * k, 1),), expected_pairs=n * n)
    return Construction(ps, spec)


def hypercube_slice_construction(d: int, k: int) -> Construction:
    ps = hypercube_slice(d, k)
    distinct = pairwise_distances(ps).distinct_count() if len(ps) > 1 else 0
    spec = ConstructionSpec("hypercube-slice", {"d": d, "k": k, "distinct": distinct})
    return Construction(ps, spec)

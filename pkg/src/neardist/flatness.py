"""Angles between vectors and planes, and flatness certificates.

A plane here is an affine subspace; only its direction space matters for
angles. Certification is one-sided: the min-max-angle plane is found
heuristically (an orthogonal least-squares fit refined by reweighting), so
a success is a proof of flatness while a refusal is only evidence.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .geometry import DEFAULT_TOL, PointSet

KINDS = ("per-point", "uniform", "global", "almost")
ORTHO_SLACK = 0.01
REFUSAL_NOTE = "refusal is heuristic evidence, not a proof of non-flatness"


@dataclass(frozen=True, eq=False)
class Subspace:
    """Affine plane ``base_point + span(basis rows)``; rows are orthonormal."""

    basis: np.ndarray
    base_point: np.ndarray

    def __post_init__(self):
        b = np.atleast_2d(np.asarray(self.basis, dtype=float))
        p = np.asarray(self.base_point, dtype=float).ravel()
        if b.size == 0:
            b = np.zeros((0, p.size))
        if b.shape[1] != p.size:
            raise ValueError("basis and base point disagree on the ambient dimension")
        if b.shape[0] > p.size:
            raise ValueError("plane dimension exceeds ambient dimension")
        gram = b @ b.T
        if not np.allclose(gram, np.eye(b.shape[0]), atol=1e-8):
            raise ValueError("basis rows must be orthonormal")
        b.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "basis", b)
        object.__setattr__(self, "base_point", p)

    @classmethod
    def span(cls, vectors, base_point=None, tol: float = DEFAULT_TOL) -> "Subspace":
        """Plane spanned by ``vectors`` (rank decided with ``tol``)."""
        v = np.atleast_2d(np.asarray(vectors, dtype=float))
        dim = v.shape[1]
        base = np.zeros(dim) if base_point is None else base_point
        if v.shape[0] == 0:
            return cls(np.zeros((0, dim)), base)
        _, s, vt = np.linalg.svd(v, full_matrices=False)
        scale = max(1.0, float(s[0])) if s.size else 1.0
        rank = int(np.count_nonzero(s > tol * scale))
        return cls(vt[:rank], base)

    @classmethod
    def coordinate(cls, axes, dim_ambient: int, base_point=None) -> "Subspace":
        eye = np.eye(dim_ambient)
        return cls(eye[list(axes)], np.zeros(dim_ambient) if base_point is None else base_point)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim_ambient(self) -> int:
        return self.basis.shape[1]

    def project(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        return (v @ self.basis.T) @ self.basis

    def complement(self) -> "Subspace":
        """Orthogonal complement of the direction space, through the same base point."""
        d = self.dim_ambient
        if self.dim == 0:
            return Subspace(np.eye(d), self.base_point)
        _, _, vt = np.linalg.svd(self.basis, full_matrices=True)
        return Subspace(vt[self.dim:], self.base_point)

    def __repr__(self):
        return f"Subspace(dim={self.dim}, ambient={self.dim_ambient})"


def _angles_to_basis(vectors: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """Angles of each (nonzero) row of ``vectors`` to span(basis)."""
    coef = vectors @ basis.T
    proj = coef @ basis
    resid = np.linalg.norm(vectors - proj, axis=1)
    along = np.linalg.norm(coef, axis=1)
    return np.arctan2(resid, along)


def angle_vector_plane(v, plane: Subspace) -> float:
    """Angle in [0, pi/2] between ``v`` and the direction space of ``plane``."""
    v = np.asarray(v, dtype=float).ravel()
    if v.size != plane.dim_ambient:
        raise ValueError("vector and plane live in different dimensions")
    if not np.any(v):
        raise ValueError("angle undefined for the zero vector")
    return float(_angles_to_basis(v[None, :], plane.basis)[0])


def angle_between_vectors(u, v) -> float:
    u, v = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
    cross = np.linalg.norm(np.outer(u, v) - np.outer(v, u)) / np.sqrt(2.0)
    return float(np.arctan2(cross, float(u @ v)))


@dataclass(frozen=True)
class Fit:
    plane: Subspace
    max_angle: float
    worst: int | None  # row index of the worst input vector


def _unit_rows(vectors) -> tuple[np.ndarray, np.ndarray]:
    v = np.atleast_2d(np.asarray(vectors, dtype=float))
    norms = np.linalg.norm(v, axis=1)
    keep = norms > 0
    return v[keep] / norms[keep, None], np.flatnonzero(keep)


def _top_directions(unit: np.ndarray, d: int, weights=None) -> np.ndarray:
    m = unit if weights is None else unit * np.sqrt(weights)[:, None]
    _, _, vt = np.linalg.svd(m, full_matrices=True)
    return vt[:d]


def fit_subspace(vectors, d: int, base_point=None, refine: int = 25) -> Fit:
    """Fit a d-dimensional linear plane to direction vectors.

    Starts from the top-d principal directions of the normalized vectors and
    refines by multiplicatively up-weighting the worst-fitting vectors; the
    best plane seen is returned together with its (exactly computed) max
    angle, which is always a valid certificate for that plane.
    """
    v = np.atleast_2d(np.asarray(vectors, dtype=float))
    if v.shape[0] == 0:
        raise ValueError("need at least one vector")
    ambient = v.shape[1]
    if d < 0 or d > ambient:
        raise ValueError(f"plane dimension {d} outside [0, {ambient}]")
    base = np.zeros(ambient) if base_point is None else np.asarray(base_point, dtype=float)
    unit, idx = _unit_rows(v)
    if d == 0:
        plane = Subspace(np.zeros((0, ambient)), base)
        if unit.shape[0] == 0:
            return Fit(plane, 0.0, None)
        return Fit(plane, float(np.pi / 2), int(idx[0]))
    if unit.shape[0] == 0:
        return Fit(Subspace(np.eye(ambient)[:d], base), 0.0, None)

    basis = _top_directions(unit, d)
    angles = _angles_to_basis(unit, basis)
    best_basis, best_angles = basis, angles
    weights = np.ones(unit.shape[0])
    for _ in range(refine):
        top = float(best_angles.max())
        if top <= 1e-15:
            break
        weights = weights * np.exp(2.0 * angles / max(float(angles.max()), 1e-300))
        weights /= weights.sum()
        basis = _top_directions(unit, d, weights)
        angles = _angles_to_basis(unit, basis)
        if angles.max() < best_angles.max():
            best_basis, best_angles = basis, angles
    # re-orthonormalize to keep Subspace's invariant tight
    q, _ = np.linalg.qr(best_basis.T)
    plane = Subspace(q.T[:d], base)
    final = _angles_to_basis(unit, plane.basis)
    w = int(np.argmax(final))
    return Fit(plane, float(final[w]), int(idx[w]))


def principal_angles(plane1: Subspace, plane2: Subspace) -> np.ndarray:
    """Principal angles between the direction spaces, ascending."""
    if plane1.dim == 0 or plane2.dim == 0:
        return np.zeros(0)
    s = np.linalg.svd(plane1.basis @ plane2.basis.T, compute_uv=False)
    return np.sort(np.arccos(np.clip(s, -1.0, 1.0)))


def _max_principal_pair(plane1: Subspace, plane2: Subspace):
    """Largest angle from a unit vector of plane1 to plane2, with the vector pair realizing it."""
    m = plane1.basis @ plane2.basis.T
    u, s, vt = np.linalg.svd(m, full_matrices=True)
    # a direction of plane1 whose projection onto plane2 is shortest
    if plane1.dim > plane2.dim:
        x = u[:, -1]
        return float(np.pi / 2), x @ plane1.basis, None
    x = u[:, -1]
    sigma = float(s[plane1.dim - 1]) if s.size else 0.0
    y = vt[plane1.dim - 1] if s.size else np.zeros(plane2.dim)
    return float(np.arccos(np.clip(sigma, -1.0, 1.0))), x @ plane1.basis, y @ plane2.basis


@dataclass(frozen=True)
class FlatnessCertificate:
    """Outcome of a flatness check.

    ``ok`` certificates are proofs. Refusals (``ok`` false) are heuristic:
    they only say no plane was found.
    """

    ok: bool
    kind: str
    d: int
    alpha: float
    planes: dict = field(default_factory=dict)      # base index (or "global") -> Subspace
    angles: dict = field(default_factory=dict)      # base index (or "global") -> max angle
    max_angle: float = 0.0
    exceptional_points: tuple = ()
    worst: tuple | None = None                      # (base, p, q, angle): angle(p - q, plane) is worst
    witness_pair: tuple | None = None               # (i, j, angle, u, v) between per-point planes
    note: str = ""

    def __bool__(self):
        return self.ok


def _per_point_fit(arr: np.ndarray, p: int, d: int) -> tuple[Fit, np.ndarray]:
    others = np.array([q for q in range(len(arr)) if q != p], dtype=np.int64)
    vecs = arr[p] - arr[others]
    return fit_subspace(vecs, d, base_point=arr[p]), others


def certify_flatness(ps: PointSet, d: int, alpha: float, kind: str = "uniform",
                     base: int | None = None) -> FlatnessCertificate:
    """Certify (p,d,alpha)-flat, (d,alpha)-flat, globally or almost (d,alpha)-flat.

    ``kind="per-point"`` checks the single base point ``base`` (default 0).
    """
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    if d < 0 or d > ps.dim:
        raise ValueError(f"plane dimension {d} outside [0, {ps.dim}]")
    n = len(ps)
    arr = ps.array
    slack = ps.tol if not ps.is_exact else 0.0
    if d == 0:
        limit = 2 if kind == "almost" else 1
        ok = n <= limit
        return FlatnessCertificate(ok, kind, d, alpha, max_angle=0.0 if ok else float(np.pi / 2),
                                   note="" if ok else "only sets of at most one point are 0-flat")
    if n <= 1:
        return FlatnessCertificate(True, kind, d, alpha)

    if kind == "global":
        i, j = np.triu_indices(n, 1)
        vecs = arr[i] - arr[j]
        fit = fit_subspace(vecs, d, base_point=arr[0])
        planes, angles = {"global": fit.plane}, {"global": fit.max_angle}
        # per-point planes as extra candidates for the common plane
        if fit.max_angle > alpha + slack and n <= 200:
            unit, _ = _unit_rows(vecs)
            for p in range(n):
                cand = _per_point_fit(arr, p, d)[0].plane
                a = float(_angles_to_basis(unit, cand.basis).max())
                if a < angles["global"]:
                    planes["global"] = Subspace(cand.basis, arr[0])
                    angles["global"] = a
        final = _angles_to_basis(_unit_rows(vecs)[0], planes["global"].basis)
        w = int(np.argmax(final))
        worst = ("global", int(i[w]), int(j[w]), float(final[w]))
        ok = angles["global"] <= alpha + slack
        witness = None if ok else _witness_pair(arr, d)
        return FlatnessCertificate(ok, kind, d, alpha, planes, angles, angles["global"],
                                   worst=worst, witness_pair=witness,
                                   note="" if ok else REFUSAL_NOTE)

    bases = [0 if base is None else base] if kind == "per-point" else list(range(n))
    planes, angles, failures = {}, {}, []
    worst = None
    for p in bases:
        if not 0 <= p < n:
            raise ValueError(f"base index {p} out of range")
        fit, others = _per_point_fit(arr, p, d)
        planes[p], angles[p] = fit.plane, fit.max_angle
        if worst is None or fit.max_angle > worst[3]:
            q = int(others[fit.worst]) if fit.worst is not None else p
            worst = (p, p, q, fit.max_angle)
        if fit.max_angle > alpha + slack:
            failures.append(p)
    if kind == "almost":
        ok = len(failures) <= 2
        exceptional = tuple(failures) if ok else ()
        kept = [p for p in bases if p not in failures]
        top = max((angles[p] for p in kept), default=0.0)
        if ok:
            planes = {p: planes[p] for p in kept}
        return FlatnessCertificate(ok, kind, d, alpha, planes, angles,
                                   top if ok else worst[3], exceptional, worst,
                                   note="" if ok else REFUSAL_NOTE)
    ok = not failures
    return FlatnessCertificate(ok, kind, d, alpha, planes, angles, worst[3], (), worst,
                               note="" if ok else REFUSAL_NOTE)


def _witness_pair(arr: np.ndarray, d: int):
    """Pair of base points whose per-point planes are furthest apart."""
    n = len(arr)
    if n > 200 or n < 2:
        return None
    planes = [_per_point_fit(arr, p, d)[0].plane for p in range(n)]
    best = None
    for i, j in combinations(range(n), 2):
        ang, u, v = _max_principal_pair(planes[i], planes[j])
        if best is None or ang > best[2] + 1e-12:
            best = (i, j, ang, u, v)
    return best


def intersection(plane1: Subspace, plane2: Subspace, tol: float = DEFAULT_TOL) -> Subspace:
    """Intersection of the direction spaces (anchored at plane1's base point)."""
    if plane1.dim_ambient != plane2.dim_ambient:
        raise ValueError("planes live in different dimensions")
    if plane1.dim == 0 or plane2.dim == 0:
        return Subspace(np.zeros((0, plane1.dim_ambient)), plane1.base_point)
    m = np.hstack([plane1.basis.T, -plane2.basis.T])
    _, s, vt = np.linalg.svd(m, full_matrices=True)
    s_full = np.zeros(vt.shape[0])
    s_full[: s.size] = s
    null = vt[s_full <= tol * max(1.0, float(s[0]))]
    if null.shape[0] == 0:
        return Subspace(np.zeros((0, plane1.dim_ambient)), plane1.base_point)
    vecs = null[:, : plane1.dim] @ plane1.basis
    return Subspace.span(vecs, plane1.base_point, tol=tol)


def _orth_complement_within(outer: Subspace, inner: Subspace) -> np.ndarray:
    """Orthonormal rows spanning outer minus inner (inner must lie in outer)."""
    if inner.dim == 0:
        return outer.basis.copy()
    coef = outer.basis - (outer.basis @ inner.basis.T) @ inner.basis
    if coef.size == 0:
        return coef
    sub = Subspace.span(coef, tol=1e-9)
    return sub.basis


def _max_cos(rows: np.ndarray, plane: Subspace) -> float:
    """Largest |cos angle| between a unit vector of span(rows) and plane."""
    if rows.shape[0] == 0 or plane.dim == 0:
        return 0.0
    q, _ = np.linalg.qr(rows.T)
    return float(np.linalg.svd(q.T @ plane.basis.T, compute_uv=False).max())


@dataclass(frozen=True)
class OrthoWitness:
    ok: bool
    basis: np.ndarray | None = None   # rows v_1..v_D
    a: int = 0
    b: int = 0
    c: int = 0
    swapped: bool = False
    cos_exclusive_1: float = 0.0      # worst |cos| of span(v_1..v_a) against plane2
    cos_exclusive_2: float = 0.0      # worst |cos| of span(v_{b+1}..v_D) against plane1

    def __bool__(self):
        return self.ok


def _try_orthogonal(p1: Subspace, p2: Subspace, tol: float, swapped: bool) -> OrthoWitness:
    dim = p1.dim_ambient
    shared = intersection(p1, p2, tol)
    ex1 = _orth_complement_within(p1, shared)
    ex2 = _orth_complement_within(p2, shared)
    both = np.vstack([p1.basis, p2.basis])
    rest = Subspace.span(both, tol=tol).complement().basis
    limit = np.sin(ORTHO_SLACK)
    c1 = _max_cos(ex1, p2)
    c2 = _max_cos(np.vstack([ex2, rest]), p1)
    basis = np.vstack([ex1, shared.basis, ex2, rest])
    a = ex1.shape[0]
    b = a + shared.dim
    c = b + ex2.shape[0]
    ok = basis.shape[0] == dim and np.linalg.matrix_rank(basis, tol=1e-9) == dim
    ok = ok and c1 <= limit and c2 <= limit
    return OrthoWitness(bool(ok), basis, a, b, c, swapped, c1, c2)


def almost_orthogonal(plane1: Subspace, plane2: Subspace, tol: float = DEFAULT_TOL) -> OrthoWitness:
    """Whether the planes admit the joint basis of the almost-orthogonality definition.

    On success the witness carries the basis rows v_1..v_D and the split
    indices a <= b <= c: rows [0, b) are an orthonormal basis of plane1,
    rows [a, c) of plane2, and exclusive directions stay within 0.01 rad of
    perpendicular to the other plane.
    """
    if plane1.dim_ambient != plane2.dim_ambient:
        raise ValueError("planes live in different dimensions")
    # common point: base1 + B1 x = base2 + B2 y
    diff = plane2.base_point - plane1.base_point
    if plane1.dim + plane2.dim > 0:
        m = np.hstack([plane1.basis.T, -plane2.basis.T])
        sol, *_ = np.linalg.lstsq(m, diff, rcond=None)
        resid = float(np.linalg.norm(m @ sol - diff))
    else:
        resid = float(np.linalg.norm(diff))
    if resid > max(tol, 1e-9 * max(1.0, float(np.linalg.norm(diff)))):
        raise ValueError("planes share no common point")
    first = _try_orthogonal(plane1, plane2, tol, swapped=False)
    if first.ok:
        return first
    second = _try_orthogonal(plane2, plane1, tol, swapped=True)
    return second if second.ok else first


# --- sampled lemma checks -------------------------------------------------


@dataclass
class SamplingReport:
    name: str
    params: dict
    samples: int
    bound: float
    max_angle: float = 0.0
    max_ratio: float = 0.0
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def summary(self) -> str:
        status = "ok" if self.ok else f"{len(self.violations)} violations"
        return (f"{self.name} {' '.join(f'{k}={v}' for k, v in self.params.items())} "
                f"samples={self.samples} max_angle={self.max_angle:.6g} "
                f"bound={self.bound:.6g} max_ratio={self.max_ratio:.6g} {status}")


def _random_orthogonal(rng: np.random.Generator, dim: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    return q * np.sign(np.diag(r))


def _random_unit_in(rng, rows: np.ndarray) -> np.ndarray:
    if rows.shape[0] == 0:
        return np.zeros(rows.shape[1])
    c = rng.standard_normal(rows.shape[0])
    v = c @ rows
    return v / np.linalg.norm(v)


def _almost_orthogonal_pair(rng, max_tilt: float):
    """Random plane pair sharing a subspace of dimension >= 1, almost-orthogonal by construction."""
    while True:
        dim = int(rng.integers(3, 7))
        q = _random_orthogonal(rng, dim)
        m = int(rng.integers(1, dim))
        a1 = int(rng.integers(0, dim - m + 1))
        a2 = int(rng.integers(0, dim - m - a1 + 1))
        shared = q[:, :m].T
        ex1 = q[:, m:m + a1].T
        ex2 = q[:, m + a1:m + a1 + a2].T
        if a1 and a2:
            # tilt the exclusive directions of plane2 slightly toward plane1
            theta = rng.uniform(0, max_tilt, size=a2)
            mix = ex1[rng.integers(0, a1, size=a2)]
            ex2 = np.cos(theta)[:, None] * ex2 + np.sin(theta)[:, None] * mix
        origin = np.zeros(dim)
        p1 = Subspace.span(np.vstack([shared, ex1]), origin)
        p2 = Subspace.span(np.vstack([shared, ex2]) if a2 else shared, origin)
        if almost_orthogonal(p1, p2):
            return p1, p2


def check_lemma_almosto(samples: int = 10_000, seed: int = 0, alpha: float = 0.1,
                        max_tries: int = 200) -> SamplingReport:
    """Sample almost-orthogonal plane pairs and vectors within ``alpha`` of both.

    Asserts the angle to the intersection is at most ``10 * alpha``.
    """
    if not 0 < alpha <= 1 / 3:
        raise ValueError("alpha must lie in (0, 1/3]")
    rng = np.random.default_rng(seed)
    bound = 10 * alpha
    report = SamplingReport("lemma-almosto", {"alpha": alpha, "seed": seed}, 0, bound)
    spread = 2 * np.tan(alpha)
    while report.samples < samples:
        p1, p2 = _almost_orthogonal_pair(rng, 0.9 * ORTHO_SLACK)
        inter = intersection(p1, p2)
        ex1 = _orth_complement_within(p1, inter)
        ex2 = _orth_complement_within(p2, inter)
        normal = Subspace.span(np.vstack([p1.basis, p2.basis])).complement().basis
        for _ in range(max_tries):
            v = _random_unit_in(rng, inter.basis)
            for rows in (ex1, ex2, normal):
                if rows.shape[0]:
                    v = v + rng.uniform(-spread, spread) * _random_unit_in(rng, rows)
            if angle_vector_plane(v, p1) <= alpha and angle_vector_plane(v, p2) <= alpha:
                break
        else:
            continue
        report.samples += 1
        ang = angle_vector_plane(v, inter)
        report.max_angle = max(report.max_angle, ang)
        report.max_ratio = max(report.max_ratio, ang / alpha)
        if ang > bound:
            report.violations.append({"v": v, "plane1": p1, "plane2": p2, "angle": ang})
    return report


def check_claim_beta(samples: int = 10_000, K: float = 2.0, alpha: float = 1e-3,
                     seed: int = 0) -> SamplingReport:
    """Sample the configuration p, q, r, plane, q', r' and test angle(q - r, q' - r').

    p is the origin, q and r are within ``alpha`` of a plane through p of
    dimension >= 2, q' and r' are in the plane at angle exactly 2*alpha from
    q and r with the same lengths, and all distance ratios among p, q, r are
    at most ``K``. The bound is ``20 * sqrt(K * alpha)``.
    """
    if K < 1:
        raise ValueError("K must be at least 1")
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    rng = np.random.default_rng(seed)
    bound = 20 * np.sqrt(K * alpha)
    report = SamplingReport("claim-beta", {"K": K, "alpha": alpha, "seed": seed}, 0, bound)
    while report.samples < samples:
        dim = int(rng.integers(3, 7))
        j = int(rng.integers(2, dim))
        frame = _random_orthogonal(rng, dim)
        plane_rows, normal_rows = frame[:, :j].T, frame[:, j:].T

        def near_plane(length):
            a = _random_unit_in(rng, plane_rows)
            nvec = _random_unit_in(rng, normal_rows)
            theta = rng.uniform(0, alpha)
            return length * (np.cos(theta) * a + np.sin(theta) * nvec), a, theta

        def rotated_in_plane(x, a, theta):
            # unit w in the plane with angle(x, w) = 2 alpha
            b = _random_unit_in(rng, plane_rows)
            b = b - (b @ a) * a
            b /= np.linalg.norm(b)
            cos_phi = np.cos(2 * alpha) / np.cos(theta)
            phi = np.arccos(np.clip(cos_phi, -1.0, 1.0)) * rng.choice([-1.0, 1.0])
            return np.linalg.norm(x) * (np.cos(phi) * a + np.sin(phi) * b)

        q, aq, tq = near_plane(1.0)
        r, ar, tr = near_plane(float(np.exp(rng.uniform(-np.log(K), np.log(K)))))
        d = [np.linalg.norm(q), np.linalg.norm(r), np.linalg.norm(q - r)]
        if min(d) <= 0 or max(d) / min(d) > K:
            continue
        q2 = rotated_in_plane(q, aq, tq)
        r2 = rotated_in_plane(r, ar, tr)
        if not np.any(q2 - r2):
            continue
        report.samples += 1
        ang = angle_between_vectors(q - r, q2 - r2)
        report.max_angle = max(report.max_angle, ang)
        if bound > 0:
            report.max_ratio = max(report.max_ratio, ang / bound)
        if ang > bound + 1e-12:
            report.violations.append({"q": q, "r": r, "q2": q2, "r2": r2, "angle": ang})
    return report

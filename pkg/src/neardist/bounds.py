"""Closed-form and table-driven bounds for k-distance problems.

All arithmetic is on Python ints, so binomials never overflow. Values that
are only lower bounds carry ``exact=False`` and the flag propagates through
every product built from them.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from math import comb


def turan_T(n: int, s: int) -> int:
    """Edge count of the balanced complete ``s``-partite graph on ``n`` vertices."""
    if s < 1:
        raise ValueError("s must be at least 1")
    if n < 0:
        raise ValueError("n must be nonnegative")
    q, r = divmod(n, s)
    squares = r * (q + 1) ** 2 + (s - r) * q * q
    return (n * n - squares) // 2


def turan_part_sizes(n: int, s: int) -> list[int]:
    """Part sizes of the Turan graph, larger parts first."""
    if s < 1:
        raise ValueError("s must be at least 1")
    q, r = divmod(n, s)
    return [q + 1] * r + [q] * (s - r)


def bbs_upper(k: int, d: int) -> int:
    """Upper bound C(d+k, k) on the size of a k-distance set in R^d."""
    if k < 1 or d < 0:
        raise ValueError("need k >= 1 and d >= 0")
    return comb(d + k, k)


def binom_lower(k: int, d: int) -> int:
    """Size C(d+1, k) of the 0/1-vector construction (weight-k vectors in R^(d+1))."""
    if k < 1 or d < 0:
        raise ValueError("need k >= 1 and d >= 0")
    if k > d + 1:
        raise ValueError(f"construction undefined for k={k} > d+1={d + 1}")
    return comb(d + 1, k)


class BoundsTable:
    """Lower bounds on m_k(d), keyed by (k, d), with an exactness flag."""

    def __init__(self, entries: dict[tuple[int, int], tuple[int, bool]], version: str = "custom"):
        self.entries = dict(entries)
        self.version = version

    @classmethod
    def from_text(cls, text: str) -> "BoundsTable":
        entries, version = {}, "unversioned"
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if line.startswith("#"):
                body = line.lstrip("#").strip()
                if body.startswith("version="):
                    version = body.split("=", 1)[1].strip()
                continue
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 4 or parts[3] not in ("exact", "lower"):
                raise ValueError(f"line {lineno}: expected 'k d value exact|lower'")
            k, d, value = (int(x) for x in parts[:3])
            entries[(k, d)] = (value, parts[3] == "exact")
        return cls(entries, version)

    @classmethod
    def load(cls, path=None) -> "BoundsTable":
        if path is None:
            text = resources.files("neardist").joinpath("data/m_table.txt").read_text("utf-8")
        else:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        return cls.from_text(text)

    def with_entry(self, k: int, d: int, value: int, exact: bool = False) -> "BoundsTable":
        entries = dict(self.entries)
        entries[(k, d)] = (value, exact)
        return BoundsTable(entries, self.version + "+edited")

    def lower(self, k: int, d: int) -> tuple[int, bool]:
        if k < 1 or d < 0:
            raise ValueError("need k >= 1 and d >= 0")
        if d == 0:
            return 1, True
        if k == 1:
            return d + 1, True
        if d == 1:
            return k + 1, True
        if (k, d) in self.entries:
            return self.entries[(k, d)]
        # m_k(d) is nondecreasing in both k and d, and an AP gives k + 1
        best = max(k + 1, d + 1)
        if k <= d + 1:
            best = max(best, comb(d + 1, k))
        for (kk, dd), (value, _) in self.entries.items():
            if kk <= k and dd <= d:
                best = max(best, value)
        return best, False

    def validate(self) -> list[str]:
        """Entries contradicting C(d+1,k) <= m_k(d) <= C(d+k,k)."""
        problems = []
        for (k, d), (value, _) in sorted(self.entries.items()):
            if value > bbs_upper(k, d):
                problems.append(f"m_{k}({d}) = {value} exceeds C({d + k},{k}) = {bbs_upper(k, d)}")
            if k <= d + 1 and value < binom_lower(k, d):
                problems.append(f"m_{k}({d}) = {value} below C({d + 1},{k}) = {binom_lower(k, d)}")
        return problems


_DEFAULT: BoundsTable | None = None


def default_table() -> BoundsTable:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = BoundsTable.load()
    return _DEFAULT


def m_lower(k: int, d: int, table: BoundsTable | None = None) -> tuple[int, bool]:
    return (table or default_table()).lower(k, d)


@dataclass(frozen=True)
class PartitionWitness:
    parts: tuple[tuple[int, int], ...]
    value: int
    value_is_exact: bool


def m_prime(k: int, d: int, table: BoundsTable | None = None) -> PartitionWitness:
    """Best product of table values over splittings of (k, d) into parts (k_i >= 1, d_i >= 1).

    Ties go to fewer parts, then to the lexicographically smallest sorted
    part sequence.
    """
    if k < 1 or d < 1:
        raise ValueError("need k, d >= 1")
    table = table or default_table()

    @lru_cache(maxsize=None)
    def best(kk: int, dd: int, start: tuple[int, int]):
        # parts are generated in nondecreasing order, each >= start
        if kk == 0 and dd == 0:
            return (1, True, ())
        if kk == 0 or dd == 0:
            return None
        winner = None
        for ki in range(start[0], kk + 1):
            for di in range(start[1] if ki == start[0] else 1, dd + 1):
                rest = best(kk - ki, dd - di, (ki, di))
                if rest is None:
                    continue
                v, ex = table.lower(ki, di)
                cand = (v * rest[0], ex and rest[1], ((ki, di),) + rest[2])
                if winner is None or _key(cand) < _key(winner):
                    winner = cand
        return winner

    value, exact, parts = best(k, d, (1, 1))
    return PartitionWitness(parts, value, exact)


def _key(cand):
    return (-cand[0], len(cand[2]), cand[2])


@dataclass(frozen=True)
class FBound:
    lo: int
    hi: int
    lo_parts: tuple[int, ...]
    hi_parts: tuple[int, ...]
    lo_is_exact: bool


def f_bound(d: int, k: int, table: BoundsTable | None = None) -> FBound:
    """Bracket on max prod m_{k_i}(d) over compositions of k (common dimension d).

    ``lo`` uses table lower bounds, ``hi`` the C(d+k_i, k_i) upper bounds.
    """
    if k < 1 or d < 1:
        raise ValueError("need d, k >= 1")
    table = table or default_table()

    def solve(value_of):
        # best[j] = (value, exact, parts) over partitions of j into nonincreasing parts
        best = {0: (1, True, ())}
        for j in range(1, k + 1):
            winner = None
            for first in range(1, j + 1):
                v, ex = value_of(first)
                rest = best[j - first]
                cand = (v * rest[0], ex and rest[1], tuple(sorted((first,) + rest[2], reverse=True)))
                if winner is None or _key(cand) < _key(winner):
                    winner = cand
            best[j] = winner
        return best[k]

    lo = solve(lambda ki: table.lower(ki, d))
    hi = solve(lambda ki: (bbs_upper(ki, d), True))
    return FBound(lo[0], hi[0], lo[2], hi[2], lo[1])


@dataclass(frozen=True)
class TWitness:
    """Best value of the extension-construction parameter for (k, d).

    ``ap_parts`` are the distance counts of the arithmetic-progression
    factors (one dimension each); ``binomial`` is the single 0/1-vector
    factor ``(k_s, d_s)`` or ``None``.
    """

    k: int
    d: int
    value: int
    ap_parts: tuple[int, ...]
    binomial: tuple[int, int] | None
    unrestricted_value: int
    unrestricted_parts: tuple[tuple[str, int, int], ...]

    @property
    def observation_holds(self) -> bool:
        return self.value == self.unrestricted_value


def _balanced_ap(total: int, count: int) -> tuple[int, tuple[int, ...]] | None:
    """Best prod (k_i + 1) over ``count`` parts k_i >= 1 summing to ``total``."""
    if count == 0:
        return (1, ()) if total == 0 else None
    if total < count:
        return None
    q, r = divmod(total, count)
    parts = (q + 1,) * r + (q,) * (count - r)
    value = 1
    for p in parts:
        value *= p + 1
    return value, parts


def _unrestricted_t(k: int, dims: int):
    """Exhaustive search over every multiset of AP and binomial factors."""

    @lru_cache(maxsize=None)
    def best(kk: int, dd: int, start: tuple):
        if kk == 0 and dd == 0:
            return 1, ()
        if kk == 0 or dd == 0:
            return None
        winner = None
        for part in _factor_options(kk, dd):
            if part < start:
                continue
            kind, ki, di = part
            rest = best(kk - ki, dd - di, part)
            if rest is None:
                continue
            v = ki + 1 if kind == "ap" else comb(di + 1, ki)
            cand = (v * rest[0], (part,) + rest[1])
            if winner is None or (-cand[0], len(cand[1]), cand[1]) < (-winner[0], len(winner[1]), winner[1]):
                winner = cand
        return winner

    return best(k, dims, ("", 0, 0))


def _factor_options(kk: int, dd: int):
    for ki in range(1, kk + 1):
        yield ("ap", ki, 1)
    for di in range(1, dd + 1):
        for ki in range(1, min(kk, di + 1) + 1):
            yield ("binom", ki, di)


def t_optimizer(k: int, d: int) -> TWitness:
    """Maximise prod (k_i + 1) * C(d_s + 1, k_s) with sum k_i = k, dims summing to d - 1.

    The restricted search allows AP factors plus at most one binomial
    factor; the unrestricted search allows any number of binomial factors.
    """
    if k < 1:
        raise ValueError("k must be positive")
    if d < 2:
        raise ValueError("infeasible: need ambient dimension d >= 2")
    dims = d - 1
    best = None
    for ks in range(0, k + 1):
        ds_range = [0] if ks == 0 else range(1, dims + 1)
        for ds in ds_range:
            if ks > ds + 1:
                continue
            ap = _balanced_ap(k - ks, dims - ds)
            if ap is None:
                continue
            value = ap[0] * (comb(ds + 1, ks) if ks else 1)
            binomial = (ks, ds) if ks else None
            nparts = len(ap[1]) + (1 if ks else 0)
            cand = (-value, nparts, ap[1], binomial or (0, 0))
            if best is None or cand < best[0]:
                best = (cand, value, ap[1], binomial)
    if best is None:
        raise ValueError(f"infeasible parameters k={k}, d={d}")
    unrestricted = _unrestricted_t(k, dims)
    return TWitness(k, d, best[1], best[2], best[3], unrestricted[0], unrestricted[1])


def claim1_check(x_max: int = 30, y_max: int | None = None) -> list[tuple[int, int, int, int, int, int]]:
    """All (x, y, a, b) with 3 <= x, y, a <= x/2, b <= y/2 and C(x,a)C(y,b) > C(x+y-1, a+b).

    Each violation is reported as ``(x, y, a, b, lhs, rhs)``.
    """
    y_max = x_max if y_max is None else y_max
    if x_max < 3 or y_max < 3:
        raise ValueError("ranges must reach at least 3")
    violations = []
    for x in range(3, x_max + 1):
        for y in range(3, y_max + 1):
            for a in range(0, x // 2 + 1):
                cxa = comb(x, a)
                for b in range(0, y // 2 + 1):
                    lhs, rhs = cxa * comb(y, b), comb(x + y - 1, a + b)
                    if lhs > rhs:
                        violations.append((x, y, a, b, lhs, rhs))
    return violations


@dataclass(frozen=True)
class EqcheckLine:
    d: int
    terms: tuple[tuple[int, int], ...]   # (j + 1, m_2(d - j)) for j = 0..d
    maximum: int
    m3: int
    m3_exact: bool

    @property
    def holds(self) -> bool:
        return self.maximum <= self.m3

    def render(self) -> str:
        parts = [str(m) if f == 1 else f"{f}*{m}" for f, m in self.terms]
        rel = "<=" if self.holds else ">"
        tail = f"= m_3({self.d})" if self.m3_exact else f"<= m_3({self.d})"
        return f"d={self.d}: max{{{', '.join(parts)}}} = {self.maximum} {rel} {self.m3} {tail}"


def eqcheck_table(table: BoundsTable | None = None, d_max: int = 8) -> list[EqcheckLine]:
    """(j + 1) m_2(d - j) <= m_3(d) for every j, for d = d_max down to 1."""
    table = table or default_table()
    lines = []
    for d in range(d_max, 0, -1):
        terms = tuple((j + 1, table.lower(2, d - j)[0]) for j in range(d + 1))
        m3, exact = table.lower(3, d)
        lines.append(EqcheckLine(d, terms, max(f * m for f, m in terms), m3, exact))
    return lines

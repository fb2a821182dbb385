from itertools import combinations, product
from math import comb

import pytest
from hypothesis import given
from hypothesis import strategies as st

from neardist.bounds import (BoundsTable, bbs_upper, binom_lower, claim1_check, default_table,
                             eqcheck_table, f_bound, m_lower, m_prime, t_optimizer, turan_T,
                             turan_part_sizes)

# rows k = 2..6, columns d = 2..8 of the known lower-bound table
TABLE = {
    2: [5, 6, 10, 16, 27, 29, 45],
    3: [7, 12, 16, 24, 40, 65, 121],
    4: [9, 13, 25, 41, 73, 127, 241],
    5: [12, 20, 35, 66, 112, 168, 252],
    6: [13, 21, 40, 96, 141, 281, 505],
}


def compositions(total, parts):
    for cuts in combinations(range(1, total), parts - 1):
        b = (0,) + cuts + (total,)
        yield tuple(b[i + 1] - b[i] for i in range(parts))


def test_turan_values():
    assert turan_T(6, 3) == 12
    assert turan_T(120, 5) == 5760
    assert turan_T(121, 5) == 5856
    assert turan_T(20, 2) == 100
    assert turan_T(3, 5) == 3
    assert turan_part_sizes(7, 3) == [3, 2, 2]


@given(st.integers(1, 12), st.integers(1, 5))
def test_turan_is_best_partition(n, s):
    best = 0
    for r in range(1, min(n, s) + 1):
        for sizes in compositions(n, r):
            best = max(best, (n * n - sum(x * x for x in sizes)) // 2)
    assert turan_T(n, s) == best


def test_closed_forms():
    assert bbs_upper(2, 4) == 15
    assert binom_lower(2, 4) == 10
    with pytest.raises(ValueError, match="undefined"):
        binom_lower(6, 3)


def test_table_matches_known_values():
    t = default_table()
    for k, row in TABLE.items():
        for d, v in zip(range(2, 9), row):
            assert t.lower(k, d)[0] == v
    assert t.lower(2, 4) == (10, True)
    assert t.lower(3, 5) == (24, False)
    assert m_lower(1, 7) == (8, True)
    assert m_lower(4, 1) == (5, True)
    assert m_lower(3, 0) == (1, True)
    assert t.validate() == []


def test_fallback_outside_table():
    v, exact = m_lower(9, 3)
    assert not exact
    assert v >= 21  # monotone in k from m_6(3)
    assert m_lower(2, 9) == (max(45, comb(10, 2)), False)


def test_corrupted_table_is_caught():
    bad = default_table().with_entry(2, 4, 9)
    assert any("m_2(4)" in p for p in bad.validate())


def test_table_parse_errors():
    with pytest.raises(ValueError, match="line 2"):
        BoundsTable.from_text("# version=x\n2 2 5\n")
    assert BoundsTable.from_text("# version=7\n2 2 5 exact\n").version == "7"


def test_m_prime_examples():
    w = m_prime(6, 2)
    assert w.value == 16
    assert w.parts == ((3, 1), (3, 1))
    w = m_prime(4, 3)
    assert w.value == 15
    assert w.parts == ((2, 1), (2, 2))


def test_m_prime_matches_brute_force():
    t = default_table()
    for k in range(1, 7):
        for d in range(1, 9):
            best = 0
            for r in range(1, min(k, d) + 1):
                for ks in compositions(k, r):
                    for ds in compositions(d, r):
                        v = 1
                        for ki, di in zip(ks, ds):
                            v *= t.lower(ki, di)[0]
                        best = max(best, v)
            assert m_prime(k, d).value == best, (k, d)


def test_f_bound_matches_brute_force():
    t = default_table()
    for k in range(1, 7):
        for d in range(1, 9):
            lo = hi = 0
            for r in range(1, k + 1):
                for ks in compositions(k, r):
                    a = b = 1
                    for ki in ks:
                        a *= t.lower(ki, d)[0]
                        b *= comb(d + ki, ki)
                    lo, hi = max(lo, a), max(hi, b)
            fb = f_bound(d, k)
            assert (fb.lo, fb.hi) == (lo, hi), (k, d)
            assert fb.lo <= fb.hi


def test_f_bound_examples():
    assert f_bound(2, 2).lo == 9
    assert f_bound(1, 2).lo == 4


def _t_brute(k, dims, max_binomials):
    """Best product over factor lists; each AP factor (k_i) uses one dimension."""
    best = 0

    def rec(kk, dd, value, binoms, last):
        nonlocal best
        if kk == 0 and dd == 0:
            best = max(best, value)
            return
        if kk == 0 or dd == 0:
            return
        for part in [("a", ki, 1) for ki in range(1, kk + 1)] + \
                [("b", ki, di) for di in range(1, dd + 1) for ki in range(1, min(kk, di + 1) + 1)]:
            if part < last or part[2] > dd or part[1] > kk:
                continue
            kind, ki, di = part
            if kind == "b" and binoms == max_binomials:
                continue
            v = ki + 1 if kind == "a" else comb(di + 1, ki)
            rec(kk - ki, dd - di, value * v, binoms + (kind == "b"), part)

    rec(k, dims, 1, 0, ("", 0, 0))
    return best


def test_t_optimizer_against_enumeration():
    for k in range(1, 7):
        for d in range(2, 8):
            w = t_optimizer(k, d)
            assert w.value == _t_brute(k, d - 1, 1)
            assert w.unrestricted_value == _t_brute(k, d - 1, 99)


def test_t_optimizer_examples():
    assert t_optimizer(2, 4).value == 6
    for d in range(2, 10):
        assert t_optimizer(1, d).value == d
    with pytest.raises(ValueError, match="infeasible"):
        t_optimizer(2, 1)


def test_claim1_single_violation():
    assert claim1_check(30) == [(4, 4, 2, 2, 36, 35)]
    assert claim1_check(3) == []


def test_eqcheck_table():
    lines = eqcheck_table()
    assert [ln.d for ln in lines] == list(range(8, 0, -1))
    m2 = {1: 3, **dict(zip(range(2, 9), TABLE[2]))}
    m2[0] = 1
    for ln in lines:
        want = max((j + 1) * m2[ln.d - j] for j in range(ln.d + 1))
        assert ln.maximum == want
        assert ln.holds
    assert [ln.maximum for ln in lines] == [81, 54, 32, 20, 15, 10, 6, 3]
    assert lines[3].render() == "d=5: max{16, 2*10, 3*6, 4*5, 5*3, 6*1} = 20 <= 24 <= m_3(5)"


@given(st.integers(1, 6), st.integers(1, 8))
def test_m_lower_between_closed_forms(k, d):
    v, _ = m_lower(k, d)
    assert v <= bbs_upper(k, d)
    if k <= d + 1:
        assert binom_lower(k, d) <= v

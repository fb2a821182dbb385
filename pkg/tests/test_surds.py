from decimal import Decimal, getcontext
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from neardist.surds import exact_sqrt, sign_linear_sqrt, sign_sqrt_sum, sqrt_enclosure

getcontext().prec = 120

rationals = st.fractions(min_value=0, max_value=1000, max_denominator=50)


def _dec(q):
    q = Fraction(q)
    return Decimal(q.numerator) / Decimal(q.denominator)


def _oracle(a, b, c, d):
    v = _dec(a).sqrt() + _dec(b).sqrt() - _dec(c).sqrt() - _dec(d).sqrt()
    if abs(v) < Decimal(10) ** -90:
        return 0
    return 1 if v > 0 else -1


@settings(max_examples=400, deadline=None)
@given(rationals, rationals, rationals, rationals)
def test_sign_matches_high_precision(a, b, c, d):
    assert sign_sqrt_sum(a, b, c, d) == _oracle(a, b, c, d)


@given(rationals, rationals)
def test_sign_antisymmetric(a, b):
    assert sign_sqrt_sum(a, 0, b, 0) == -sign_sqrt_sum(b, 0, a, 0)


def test_hidden_equalities():
    # sqrt2 + sqrt8 = sqrt18 ; sqrt3 + sqrt12 = sqrt27
    assert sign_sqrt_sum(2, 8, 18, 0) == 0
    assert sign_sqrt_sum(3, 12, 27, 0) == 0
    assert sign_sqrt_sum(2, 8, 18, Fraction(1, 10**30)) == -1
    assert sign_sqrt_sum(4, 1, 9, 0) == 0
    assert sign_sqrt_sum(1, 1, 2, 2) == -1


def test_nearly_equal_surds():
    # sqrt(10^12 + 1) - 10^6 is about 5e-7 but still positive
    assert sign_sqrt_sum(10**12 + 1, 0, 10**12, 0) == 1
    assert sign_sqrt_sum(10**12 + 1, 0, 10**12, Fraction(1, 10**13)) == 1
    assert sign_sqrt_sum(10**12 + 1, 0, 10**12, Fraction(1, 10**12)) == -1


def test_linear_sqrt_cases():
    assert sign_linear_sqrt(-3, 2, 2) == -1
    assert sign_linear_sqrt(-3, 2, 3) == 1
    assert sign_linear_sqrt(-2, 1, 4) == 0
    with pytest.raises(ValueError):
        sign_linear_sqrt(1, 1, -1)
    with pytest.raises(ValueError):
        sign_sqrt_sum(-1, 0, 0, 0)


@given(rationals)
def test_enclosure_brackets_root(q):
    lo, hi = sqrt_enclosure(q, bits=40)
    assert lo * lo <= q <= hi * hi
    assert hi - lo <= Fraction(1, 2**40)


def test_exact_sqrt():
    assert exact_sqrt(Fraction(9, 4)) == Fraction(3, 2)
    assert exact_sqrt(2) is None
    assert exact_sqrt(0) == 0

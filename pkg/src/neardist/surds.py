"""Exact sign tests for expressions built from square roots of rationals.

Exact-mode point sets only know squared distances as rationals. Every
comparison the interval cover needs reduces to the sign of
``sqrt(a) + sqrt(b) - sqrt(c) - sqrt(d)``, which can be decided without
approximation by repeated squaring.
"""

from __future__ import annotations

from fractions import Fraction
from math import isqrt

Rational = Fraction | int


def _sign(x) -> int:
    return (x > 0) - (x < 0)


def sign_linear_sqrt(f: Rational, g: Rational, h: Rational) -> int:
    """Sign of ``f + g*sqrt(h)`` for ``h >= 0``."""
    if h < 0:
        raise ValueError("negative radicand")
    sf, sg = _sign(f), _sign(g)
    if sg == 0 or h == 0:
        return sf
    if sf == 0:
        return sg
    if sf == sg:
        return sf
    # opposite signs: the larger magnitude wins
    return sf * _sign(f * f - g * g * h)


def sign_sqrt_sum(a: Rational, b: Rational, c: Rational, d: Rational) -> int:
    """Sign of ``sqrt(a) + sqrt(b) - sqrt(c) - sqrt(d)`` for nonnegative inputs."""
    if min(a, b, c, d) < 0:
        raise ValueError("negative radicand")
    # both sides are nonnegative, so compare squares:
    # e + 2 sqrt(ab) - 2 sqrt(cd),  e = a + b - c - d
    e = a + b - c - d
    ab, cd = a * b, c * d
    lhs = sign_linear_sqrt(e, 2, ab)  # sign of e + 2 sqrt(ab)
    if lhs < 0:
        return -1
    if cd == 0:
        return lhs
    if lhs == 0:
        return -1
    # e + 2 sqrt(ab) >= 0 and 2 sqrt(cd) > 0; square once more
    return sign_linear_sqrt(e * e + 4 * ab - 4 * cd, 4 * e, ab)


def sqrt_enclosure(q: Rational, bits: int = 64) -> tuple[Fraction, Fraction]:
    """Rational ``(lo, hi)`` with ``lo <= sqrt(q) <= hi`` and ``hi - lo <= 2**-bits``.

    Returns a degenerate interval when ``q`` is a perfect rational square.
    """
    q = Fraction(q)
    if q < 0:
        raise ValueError("negative radicand")
    num, den = q.numerator, q.denominator
    rn, rd = isqrt(num), isqrt(den)
    if rn * rn == num and rd * rd == den:
        exact = Fraction(rn, rd)
        return exact, exact
    # sqrt(num/den) = sqrt(num*den)/den
    scale = 1 << bits
    root = isqrt(num * den * scale * scale)
    lo = Fraction(root, den * scale)
    hi = Fraction(root + 1, den * scale)
    return lo, hi


def exact_sqrt(q: Rational) -> Fraction | None:
    """``sqrt(q)`` as a Fraction when it is rational, else ``None``."""
    lo, hi = sqrt_enclosure(q, bits=1)
    return lo if lo == hi else None

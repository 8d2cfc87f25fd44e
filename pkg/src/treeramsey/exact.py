"""Exact sign tests for real powers against rationals.

Theorem-style thresholds such as ``2**w > M`` with a dyadic ``w`` must be
decided without rounding. ``exp2_cmp`` handles base 2 with bit-length fast
paths and a digit-by-digit comparison of ``log2`` by repeated squaring;
``pow_cmp`` covers other rational bases.
"""

from __future__ import annotations

from fractions import Fraction

import mpmath

# exact big-integer fallback is used while operands stay below this many bits
EXACT_BITS = 1 << 24


def _floor_log2(a: int, b: int) -> int:
    """Largest ``t`` with ``2**t <= a/b`` (``a, b > 0``)."""
    t = a.bit_length() - b.bit_length()
    if (a << max(0, -t)) < (b << max(0, t)):
        t -= 1
    return t


def _log2_below(x: Fraction, f: Fraction) -> int:
    """Sign of ``f - log2(x)`` for ``1 < x < 2`` and ``0 < f < 1``.

    Emits binary digits of ``log2(x)`` by squaring and halving, against the
    digits of ``f``. Squaring runs on fixed-point integer intervals; an
    undecided digit doubles the working precision and restarts. ``log2(x)`` is
    irrational here, so the digit streams always part.
    """
    prec = 128
    while True:
        one = 1 << prec
        two = one << 1
        lo = (x.numerator << prec) // x.denominator
        hi = -((-x.numerator << prec) // x.denominator)
        g = f
        steps = 0
        while True:
            steps += 1
            if steps > 4 * prec:
                break
            lo = (lo * lo) >> prec
            hi = -((-(hi * hi)) >> prec)
            if lo >= two:
                digit = 1
                lo >>= 1
                hi = -((-hi) >> 1)
            elif hi < two:
                digit = 0
            else:
                break
            g *= 2
            gdigit = 1 if g >= 1 else 0
            g -= gdigit
            if digit != gdigit:
                return 1 if gdigit > digit else -1
            if g == 0:
                # f ran out of digits while log2(x) has a positive remainder
                return -1
            if lo < one:
                lo = one
        prec *= 2


def exp2_cmp(exponent: Fraction | int, rhs: Fraction | int) -> int:
    """Return the sign of ``2**exponent - rhs`` exactly."""
    e = Fraction(exponent)
    r = Fraction(rhs)
    if r <= 0:
        return 1
    t = _floor_log2(r.numerator, r.denominator)
    if e >= t + 1:
        return 1
    if e < t:
        return -1
    x = r / Fraction(2) ** t
    if e == t:
        return 0 if x == 1 else -1
    if x == 1:
        return 1
    return _log2_below(x, e - t)


def exp2_exceeds(exponent: Fraction | int, rhs: Fraction | int) -> bool:
    return exp2_cmp(exponent, rhs) > 0


def _exact_pow_cmp(base: Fraction, exponent: Fraction, rhs: Fraction) -> int:
    a, b = exponent.numerator, exponent.denominator
    if a < 0:
        base, a = 1 / base, -a
    # base**(a/b) vs rhs  <=>  base**a vs rhs**b
    left_num, left_den = base.numerator**a, base.denominator**a
    right_num, right_den = rhs.numerator**b, rhs.denominator**b
    lhs, rhs_ = left_num * right_den, right_num * left_den
    return (lhs > rhs_) - (lhs < rhs_)


def pow_cmp(base: Fraction | int, exponent: Fraction | int, rhs: Fraction | int) -> int:
    """Return the sign of ``base**exponent - rhs`` for a positive rational base."""
    base, e, r = Fraction(base), Fraction(exponent), Fraction(rhs)
    if base <= 0:
        raise ValueError("base must be positive")
    if r <= 0:
        return 1
    if base == 2:
        return exp2_cmp(e, r)
    if base == 1 or e == 0:
        return (1 > r) - (1 < r)
    size = abs(e.numerator) * max(base.numerator, base.denominator).bit_length()
    size += e.denominator * max(r.numerator, r.denominator).bit_length()
    if size <= EXACT_BITS:
        return _exact_pow_cmp(base, e, r)
    prec = 128
    while prec <= 1 << 16:
        with mpmath.workprec(prec):
            lb = mpmath.log(mpmath.mpf(base.numerator)) - mpmath.log(mpmath.mpf(base.denominator))
            lr = mpmath.log(mpmath.mpf(r.numerator)) - mpmath.log(mpmath.mpf(r.denominator))
            ev = mpmath.mpf(e.numerator) / e.denominator
            diff = ev * lb - lr
            scale = abs(ev * lb) + abs(lr) + 1
            if abs(diff) > scale * mpmath.ldexp(1, 16 - prec):
                return 1 if diff > 0 else -1
        prec *= 4
    return _exact_pow_cmp(base, e, r)

"""Hurwitz class numbers and weighted class numbers of imaginary quadratic orders.

Both are computed by enumerating reduced positive definite forms
ax^2 + bxy + cy^2 with |b| <= a <= c (b >= 0 if |b| = a or a = c).
"""

from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt
from typing import NamedTuple

MEMO_SIZE = 10**7


class QuadForm(NamedTuple):
    a: int
    b: int
    c: int

    @property
    def discriminant(self):
        return self.b * self.b - 4 * self.a * self.c


def _check_disc(D):
    if D >= 0:
        raise ValueError(f"discriminant must be negative, got {D}")


def _iter_reduced(D):
    # yields (a, b, c) with b >= 0; caller mirrors b -> -b where allowed
    n = -D
    b = n % 2
    while 3 * b * b <= n:
        m = (b * b + n) // 4
        for a in range(max(b, 1), isqrt(m) + 1):
            if m % a == 0:
                yield a, b, m // a
        b += 2


def reduced_forms(D):
    """All reduced forms of discriminant D, sorted by (a, b, c)."""
    _check_disc(D)
    if D % 4 not in (0, 1):
        raise ValueError(f"{D} is not a discriminant (must be 0 or 1 mod 4)")
    out = []
    for a, b, c in _iter_reduced(D):
        out.append(QuadForm(a, b, c))
        if 0 < b < a < c:
            out.append(QuadForm(a, -b, c))
    out.sort()
    return out


def unit_index(D):
    """[O(D)^x : Z^x] for an imaginary quadratic order of discriminant D."""
    return {-3: 3, -4: 2}.get(D, 1)


@lru_cache(maxsize=MEMO_SIZE)
def h_weighted(D):
    """Class number of the order of discriminant D divided by its unit index.

    Zero when D is not a discriminant.  h_weighted(-3) = 1/3, h_weighted(-4) = 1/2.
    """
    _check_disc(D)
    if D % 4 not in (0, 1):
        return Fraction(0)
    h = 0
    for a, b, c in _iter_reduced(D):
        if gcd(gcd(a, b), c) != 1:
            continue
        h += 2 if 0 < b < a < c else 1
    return Fraction(h, unit_index(D))


@lru_cache(maxsize=MEMO_SIZE)
def hurwitz(n):
    """Hurwitz class number H(n), with H(0) = -1/12."""
    if n < 0:
        raise ValueError(f"hurwitz: n must be nonnegative, got {n}")
    if n == 0:
        return Fraction(-1, 12)
    if n % 4 in (1, 2):
        return Fraction(0)
    twelfths = 0
    for a, b, c in _iter_reduced(-n):
        if b == 0:
            twelfths += 6 if a == c else 12
        elif b == a == c:
            twelfths += 4
        elif b == a or a == c:
            twelfths += 12
        else:
            twelfths += 24
    return Fraction(twelfths, 12)


def hurwitz_by_orders(n):
    """H(n) as the sum of h_weighted(-n/f^2) over f^2 | n (cross-check route)."""
    if n <= 0:
        raise ValueError("hurwitz_by_orders: n must be positive")
    total = Fraction(0)
    f = 1
    while f * f <= n:
        if n % (f * f) == 0:
            total += h_weighted(-(n // (f * f)))
        f += 1
    return total

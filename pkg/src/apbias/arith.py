"""Integer kernels: factorization, multiplicative functions, Kronecker symbol.

Exact rationals are plain :class:`fractions.Fraction` values.
"""

from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt
from typing import NamedTuple

import numpy as np

ExactRational = Fraction

SIEVE_LIMIT = 10**6


@lru_cache(maxsize=None)
def _primes():
    sieve = np.ones(SIEVE_LIMIT + 1, dtype=bool)
    sieve[:2] = False
    for i in range(2, isqrt(SIEVE_LIMIT) + 1):
        if sieve[i]:
            sieve[i * i :: i] = False
    return tuple(int(p) for p in np.flatnonzero(sieve))


def primes_up_to(n):
    """All primes <= n (n at most the sieve limit)."""
    if n > SIEVE_LIMIT:
        raise ValueError(f"primes_up_to: {n} exceeds sieve limit {SIEVE_LIMIT}")
    ps = _primes()
    lo, hi = 0, len(ps)
    while lo < hi:
        mid = (lo + hi) // 2
        if ps[mid] <= n:
            lo = mid + 1
        else:
            hi = mid
    return list(ps[:lo])


def _is_probable_prime(n):
    # deterministic Miller-Rabin for n < 3.3e24
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
    for p in small:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def is_prime(n):
    if n < 2:
        return False
    if n <= SIEVE_LIMIT:
        return factor(n) == ((n, 1),)
    return _is_probable_prime(n)


@lru_cache(maxsize=1 << 16)
def factor(n):
    """Prime factorization of ``1 <= n <= 2**63`` as a tuple of (p, e), p increasing.

    Trial division by the primes below 10^6; a composite cofactor left over
    (only possible above 10^12) is split with Pollard's rho.
    """
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise TypeError(f"factor: expected int, got {type(n).__name__}")
    n = int(n)
    if n < 1:
        raise ValueError(f"factor: n must be positive, got {n}")
    if n > 2**63:
        raise ValueError("factor: n exceeds 2**63")
    out = []
    m = n
    for p in _primes():
        if p * p > m:
            break
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            out.append((p, e))
    if m > 1:
        big = {}
        _split_large(m, big)
        out.extend(sorted(big.items()))
    return tuple(out)


def _split_large(m, acc):
    if m == 1:
        return
    if _is_probable_prime(m):
        acc[m] = acc.get(m, 0) + 1
        return
    d = _pollard_brent(m)
    _split_large(d, acc)
    _split_large(m // d, acc)


def _pollard_brent(n):
    """A nontrivial factor of the odd composite n."""
    r = isqrt(n)
    if r * r == n:
        return r
    for c in range(1, 100):
        y, m, g, q = 2, 128, 1, 1
        x = ys = y
        k = 0
        while g == 1:
            x = y
            for _ in range(k):
                y = (y * y + c) % n
            j = 0
            while j < k and g == 1:
                ys = y
                for _ in range(min(m, k - j)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = gcd(q, n)
                j += m
            k = k * 2 or 1
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = gcd(abs(x - ys), n)
        if g != n:
            return g
    raise ArithmeticError(f"no factor found for {n}")


def divisors(n):
    ds = [1]
    for p, e in factor(n):
        ds = [d * p**i for d in ds for i in range(e + 1)]
    return sorted(ds)


def sigma1(n):
    """Sum of the positive divisors of n."""
    s = 1
    for p, e in factor(n):
        s *= (p ** (e + 1) - 1) // (p - 1)
    return s


class MuOmegaPhi(NamedTuple):
    mu: int
    omega: int
    phi: int
    squarefree: bool


def mobius_omega_phi(n):
    fac = factor(n)
    omega = len(fac)
    squarefree = all(e == 1 for _, e in fac)
    mu = (-1) ** omega if squarefree else 0
    phi = 1
    for p, e in fac:
        phi *= p ** (e - 1) * (p - 1)
    return MuOmegaPhi(mu, omega, phi, squarefree)


def is_squarefree(n):
    return all(e == 1 for _, e in factor(n))


def kronecker(a, m):
    """Kronecker symbol (a/m) for m != 0.

    At 2: (a/2) = 0 for even a, +1 for a = +-1 mod 8, -1 for a = +-3 mod 8.
    At -1: sign of a (with (0/-1) = 1).
    """
    if m == 0:
        raise ValueError("kronecker: m must be nonzero")
    if gcd(a, m) != 1 and abs(m) != 1:
        return 0
    sign = 1
    if m < 0:
        m = -m
        if a < 0:
            sign = -1
    # strip powers of two from m
    v = 0
    while m % 2 == 0:
        m //= 2
        v += 1
    if v % 2 == 1 and a % 8 in (3, 5):
        sign = -sign
    # Jacobi symbol (a/m), m odd positive
    a %= m
    while a:
        while a % 2 == 0:
            a //= 2
            if m % 8 in (3, 5):
                sign = -sign
        a, m = m, a
        if a % 4 == 3 and m % 4 == 3:
            sign = -sign
        a %= m
    return sign if m == 1 else 0

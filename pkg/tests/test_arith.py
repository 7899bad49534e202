from math import gcd, prod

import pytest
from hypothesis import given, strategies as st

from apbias.arith import (divisors, factor, is_prime, is_squarefree, kronecker,
                          mobius_omega_phi, primes_up_to, sigma1)


@pytest.mark.parametrize("n, want", [(1, ()), (14, ((2, 1), (7, 1))), (88, ((2, 3), (11, 1)))])
def test_factor_examples(n, want):
    assert tuple(factor(n)) == want


@pytest.mark.parametrize("bad", [0, -5, 2**63 + 1])
def test_factor_rejects_out_of_range(bad):
    with pytest.raises(ValueError):
        factor(bad)


def test_factor_round_trip_to_a_million():
    for n in range(1, 10**6 + 1):
        assert prod(p**e for p, e in factor(n)) == n


@given(st.integers(1, 2**63))
def test_factor_round_trip_large(n):
    f = factor(n)
    assert prod(p**e for p, e in f) == n
    ps = [p for p, _ in f]
    assert ps == sorted(set(ps)) and all(is_prime(p) for p in ps)


@pytest.mark.parametrize("n, want", [(1, 1), (2, 3), (6, 12)])
def test_sigma1_examples(n, want):
    assert sigma1(n) == want


@pytest.mark.parametrize("n, want", [(11, (-1, 1, 10, True)), (14, (1, 2, 6, True)), (12, (0, 2, 4, False))])
def test_mobius_omega_phi_examples(n, want):
    assert tuple(mobius_omega_phi(n)) == want


def _brute_phi(n):
    return sum(1 for k in range(1, n + 1) if gcd(k, n) == 1)


@given(st.integers(1, 3000))
def test_multiplicative_functions_against_brute_force(n):
    assert sigma1(n) == sum(d for d in range(1, n + 1) if n % d == 0)
    assert mobius_omega_phi(n).phi == _brute_phi(n)
    assert is_squarefree(n) == all(n % (d * d) for d in range(2, n + 1) if d * d <= n)
    assert sorted(divisors(n)) == [d for d in range(1, n + 1) if n % d == 0]


@given(st.integers(1, 10**4), st.integers(1, 10**4))
def test_multiplicativity_on_coprime_pairs(a, b):
    if gcd(a, b) != 1:
        return
    ab, fa, fb = mobius_omega_phi(a * b), mobius_omega_phi(a), mobius_omega_phi(b)
    assert sigma1(a * b) == sigma1(a) * sigma1(b)
    assert ab.phi == fa.phi * fb.phi
    assert ab.mu == fa.mu * fb.mu
    assert ab.omega == fa.omega + fb.omega


@pytest.mark.parametrize("a, m, want", [(-12, 2, 0), (-8, 11, 1), (-11, 2, -1)])
def test_kronecker_examples(a, m, want):
    assert kronecker(a, m) == want


def test_kronecker_rejects_zero_modulus():
    with pytest.raises(ValueError):
        kronecker(3, 0)


def test_kronecker_matches_square_enumeration():
    for p in primes_up_to(300)[1:]:
        squares = {x * x % p for x in range(1, p)}
        for a in range(-299, 300):
            want = 0 if a % p == 0 else (1 if a % p in squares else -1)
            assert kronecker(a, p) == want, (a, p)


@pytest.mark.parametrize("a", range(-40, 41))
def test_kronecker_at_two(a):
    want = 0 if a % 2 == 0 else (1 if a % 8 in (1, 7) else -1)
    assert kronecker(a, 2) == want


@given(st.integers(-10**6, 10**6), st.integers(1, 500), st.integers(1, 500))
def test_kronecker_multiplicative_in_modulus(a, m1, m2):
    assert kronecker(a, m1 * m2) == kronecker(a, m1) * kronecker(a, m2)


def test_primality_agrees_with_sieve():
    ps = set(primes_up_to(20000))
    assert all(is_prime(n) == (n in ps) for n in range(20001))
    assert is_prime(2**61 - 1) and not is_prime(2**61 + 1)


@pytest.mark.parametrize("parts", [((1000003, 2),), ((1000003, 1), (1000033, 1)),
                                   ((2, 1), (2147483647, 2)), ((3037000493, 1),),
                                   ((1000000007, 1), (1000000009, 1))])
def test_factor_beyond_trial_division(parts):
    n = prod(p**e for p, e in parts)
    assert factor(n) == parts

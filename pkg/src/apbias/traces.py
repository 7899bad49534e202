"""Traces of Hecke operators on newforms of squarefree level, split by root number.

All arithmetic is exact; class numbers are Fractions and every trace is
checked to be an integer before it is returned.

Conventions: p_k(b, c) = (r1^(k-1) - r2^(k-1)) / (r1 - r2) for the roots of
x^2 - b x + c; the root number of a newform is (-1)^(k/2) times its W_N
eigenvalue.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt
from typing import NamedTuple

from .arith import divisors, factor, is_prime, kronecker, mobius_omega_phi, sigma1
from .bias import BiasSeries, SeriesBuilder, StratumKey, checkpoint_grid, weight_eval
from .classno import h_weighted, hurwitz

MEMO_SIZE = 1 << 20


@dataclass(frozen=True)
class TraceQuery:
    k: int
    N: int
    n: int

    def __post_init__(self):
        if self.k < 2 or self.k % 2:
            raise ValueError(f"weight must be even and >= 2, got {self.k}")
        if self.N < 1 or not mobius_omega_phi(self.N).squarefree:
            raise ValueError(f"level must be squarefree and positive, got {self.N}")
        if self.n < 1:
            raise ValueError(f"Hecke index must be positive, got {self.n}")
        if gcd(self.n, self.N) != 1:
            raise ValueError(f"Hecke index {self.n} not coprime to level {self.N}")


@dataclass(frozen=True)
class SignedTraces:
    tr_plus: int
    tr_minus: int
    tr_new: int
    tr_new_WN: int


class DimPair(NamedTuple):
    dim_plus: int
    dim_minus: int


class BoundCheck(NamedTuple):
    residual: Fraction
    bound: Fraction
    ok: bool


def u_poly_oddindex(k, B, c):
    """p_k(b, c) for b^2 = B, by the integer recursion on odd indices.

    U_1 = 1, U_3 = B - c, U_{m+2} = (B - 2c) U_m - c^2 U_{m-2}; returns U_{k-1}.
    """
    if k < 2 or k % 2:
        raise ValueError(f"k must be even and >= 2, got {k}")
    prev, cur = 1, B - c  # U_1, U_3
    if k == 2:
        return 1
    step = B - 2 * c
    c2 = c * c
    for _ in range((k - 4) // 2):
        prev, cur = cur, step * cur - c2 * prev
    return cur


def _as_int(x, what):
    if isinstance(x, Fraction):
        if x.denominator != 1:
            raise ArithmeticError(f"{what} is not integral: {x}")
        return x.numerator
    return int(x)


@lru_cache(maxsize=MEMO_SIZE)
def _trace_TnWN(k, N, n):
    total = Fraction(0)
    bound = 4 * n
    m = 0
    while N * m * m <= bound:
        term = u_poly_oddindex(k, m * m * N, n) * hurwitz(4 * n * N - N * N * m * m)
        total += term if m == 0 else 2 * term
        m += 1
    tr = -total / 2
    if k == 2:
        tr += sigma1(n)
    if N == 1:
        # W_1 = 1: the hyperbolic divisor term of the full trace formula
        tr -= Fraction(sum(min(d, n // d) ** (k - 1) for d in divisors(n)), 2)
    return _as_int(tr, f"tr T_{n} W_{N} (k={k})")


def trace_full_TnWN(q):
    """Trace of T_n W_N on S_k(N) (squarefree N, gcd(n, N) = 1)."""
    return _trace_TnWN(q.k, q.N, q.n)


def trace_new_TnWN(q):
    """Trace of T_n W_N on the new subspace; equal to the full-space trace."""
    return trace_full_TnWN(q)


def _is_square(n):
    r = isqrt(n)
    return r * r == n


@lru_cache(maxsize=MEMO_SIZE)
def _trace_new_Tn(k, N, n):
    primes_N = [p for p, _ in factor(N)]
    total = Fraction(0)
    t = 0
    while t * t < 4 * n:
        disc = t * t - 4 * n
        inner = Fraction(0)
        f = 1
        while f * f <= -disc:
            if disc % (f * f) == 0:
                hw = h_weighted(disc // (f * f))
                if hw:
                    B = 1
                    for p in primes_N:
                        B *= p - 1 if f % p == 0 else kronecker(disc, p) - 1
                    inner += hw * B
            f += 1
        term = u_poly_oddindex(k, t * t, n) * inner
        total += term if t == 0 else 2 * term
        t += 1
    tr = -total / 2
    if k == 2:
        tr += mobius_omega_phi(N).mu * sigma1(n)
    return _as_int(tr, f"tr T_{n} on S_{k}^new({N})")


def trace_new_Tn(q):
    """Trace of T_n on S_k^new(N) for squarefree N > 1 and nonsquare n > 1."""
    if q.N == 1:
        raise ValueError("trace_new_Tn: level 1 is not covered by this formula")
    if q.n == 1 or _is_square(q.n):
        raise ValueError(f"trace_new_Tn: n = {q.n} must be a nonsquare > 1")
    return _trace_new_Tn(q.k, q.N, q.n)


def trace_signed(q):
    """Traces of T_n on the root number +1 and -1 parts of S_k^new(N)."""
    tr_new = trace_new_Tn(q)
    tr_w = trace_new_TnWN(q)
    return _split(q.k, tr_new, tr_w)


def _split(k, tr_new, tr_w):
    s = (-1) ** (k // 2)
    twice_plus = tr_new + s * tr_w
    twice_minus = tr_new - s * tr_w
    if twice_plus % 2 or twice_minus % 2:
        raise ArithmeticError(f"parity mismatch in signed split: {tr_new}, {tr_w}")
    return SignedTraces(twice_plus // 2, twice_minus // 2, tr_new, tr_w)


# ---------------------------------------------------------------- dimensions

def dim_cusp_forms(k, N):
    """dim S_k(Gamma_0(N)) for even k >= 2."""
    if k < 2 or k % 2:
        raise ValueError("k must be even and >= 2")
    fac = factor(N)
    mu = N
    for p, _ in fac:
        mu = mu // p * (p + 1)
    nu2 = 0 if N % 4 == 0 else _prod(1 + kronecker(-4, p) for p, _ in fac)
    nu3 = 0 if N % 9 == 0 else _prod(1 + kronecker(-3, p) for p, _ in fac)
    cusps = sum(mobius_omega_phi(gcd(d, N // d)).phi for d in divisors(N))
    # 12 g = 12 + mu - 3 nu2 - 4 nu3 - 6 cusps
    twelve_g = 12 + mu - 3 * nu2 - 4 * nu3 - 6 * cusps
    g = twelve_g // 12
    if k == 2:
        return g
    return (k - 1) * (g - 1) + (k // 4) * nu2 + (k // 3) * nu3 + (k // 2 - 1) * cusps


def _prod(it):
    out = 1
    for x in it:
        out *= x
    return out


def dim_new(k, N):
    """dim S_k^new(N) for squarefree N, by inclusion-exclusion over divisors."""
    if not mobius_omega_phi(N).squarefree:
        raise ValueError(f"dim_new: level must be squarefree, got {N}")
    return sum((-2) ** len(factor(N // d)) * dim_cusp_forms(k, d) for d in divisors(N))


@lru_cache(maxsize=MEMO_SIZE)
def _dim_new_signed(k, N):
    d = dim_new(k, N)
    tr_w = trace_new_TnWN(TraceQuery(k, N, 1))
    s = (-1) ** (k // 2)
    if (d + tr_w) % 2:
        raise ArithmeticError(f"dimension split not integral at k={k}, N={N}")
    return DimPair((d + s * tr_w) // 2, (d - s * tr_w) // 2)


def dim_new_signed(k, N):
    TraceQuery(k, N, 1)
    return _dim_new_signed(k, N)


# ---------------------------------------------------------------- bounds

def ms_bound(q):
    """Upper bound for |tr T_n| on S_k^new(N) from the explicit formula."""
    omega = mobius_omega_phi(q.N).omega
    return (2 ** (omega + 1) * (4 * q.n) ** (q.k // 2) + (q.k == 2)) * sigma1(q.n)


def signed_center(q):
    """(1/4) n^((k-2)/2) H(4nN): the main term of tr^+ (and minus that of tr^-).

    The s = 0 term of the T_n W_N trace is -(1/2) p_k(0, n) H(4nN) with
    p_k(0, n) = (-n)^((k-2)/2); after the (-1)^(k/2) twist of the split the
    sign is positive for every even k.
    """
    return Fraction(q.n ** ((q.k - 2) // 2)) * hurwitz(4 * q.n * q.N) / 4


def prop_bound_check(q):
    """Compare |tr^+- -+ center| with (2^omega(N) (4n)^(k/2) + delta_{k,2}) sigma_1(n).

    Needs N > 4n.  The residual reported is the larger of the two signs.
    """
    if q.N <= 4 * q.n:
        raise ValueError(f"prop_bound_check needs N > 4n (N={q.N}, n={q.n})")
    st = trace_signed(q)
    c = signed_center(q)
    residual = max(abs(st.tr_plus - c), abs(st.tr_minus + c))
    omega = mobius_omega_phi(q.N).omega
    bound = Fraction((2**omega * (4 * q.n) ** (q.k // 2) + (q.k == 2)) * sigma1(q.n))
    return BoundCheck(residual, bound, residual < bound)


# ---------------------------------------------------------------- series

def signed_traces_at_level(k, N, n):
    """SignedTraces for any squarefree N coprime to n, level 1 included."""
    if N == 1:
        tr = trace_full_TnWN(TraceQuery(k, 1, n))
        return _split(k, tr, tr)
    return trace_signed(TraceQuery(k, N, n))


def mf_bias_series(k, p, X_max, phi, checkpoints=200):
    """Weighted averages of a_p over newforms of squarefree level <= X, by root number.

    Sums of a_p(f) phi(N_f) over newforms of level N are phi(N) tr^+-(T_p), and
    the form counts are the signed dimensions.  Levels divisible by p are
    skipped, as are levels outside the weight's domain.
    Returns (series_plus, series_minus).
    """
    if not is_prime(p):
        raise ValueError(f"p must be prime, got {p}")
    if X_max < 10:
        raise ValueError("X_max must be at least 10")
    builder = SeriesBuilder(checkpoint_grid(X_max, checkpoints),
                            lambda s: StratumKey("by_root_number", s, p, phi.name))
    for N in range(1, X_max + 1):
        if N % p == 0 or not mobius_omega_phi(N).squarefree:
            continue
        builder.advance(N)
        dims = dim_new_signed(k, N)
        if dims.dim_plus == dims.dim_minus == 0 or N < phi.min_arg:
            continue
        st = signed_traces_at_level(k, N, p)
        w = weight_eval(phi, N)
        if dims.dim_plus:
            builder.add(1, st.tr_plus * w, dims.dim_plus)
        if dims.dim_minus:
            builder.add(-1, st.tr_minus * w, dims.dim_minus)
    series = {s.stratum.r_or_sign: s for s in builder.finish()}
    plus = series.get(1, BiasSeries(StratumKey("by_root_number", 1, p, phi.name)))
    minus = series.get(-1, BiasSeries(StratumKey("by_root_number", -1, p, phi.name)))
    return plus, minus

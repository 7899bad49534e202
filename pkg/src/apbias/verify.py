"""Property suites behind ``apbias verify``.

Each suite is a list of named checks; a check returns (ok, detail).
"""

import random
from fractions import Fraction
from math import gcd, isqrt, log, sqrt

import numpy as np

from . import arith, classno, curves, traces
from .bias import WEIGHTS, ec_bias_series
from .data import fixture_path

ORACLE_LEVELS = (11, 14, 15, 17, 19, 21)


def _check(name):
    def deco(fn):
        fn.check_name = name
        return fn
    return deco


# ---------------------------------------------------------------- arith

@_check("factor round trip n <= 10^5")
def factor_roundtrip(limit=10**5):
    for n in range(1, limit + 1):
        prod = 1
        for p, e in arith.factor(n):
            prod *= p**e
        if prod != n:
            return False, f"n={n}"
    return True, ""


@_check("multiplicativity of sigma1, phi, mu")
def multiplicativity(samples=2000, seed=1):
    rng = random.Random(seed)
    for _ in range(samples):
        a, b = rng.randint(1, 10**4), rng.randint(1, 10**4)
        if gcd(a, b) != 1:
            continue
        fa, fb, fab = (arith.mobius_omega_phi(x) for x in (a, b, a * b))
        if arith.sigma1(a * b) != arith.sigma1(a) * arith.sigma1(b):
            return False, f"sigma1({a},{b})"
        if fab.phi != fa.phi * fb.phi or fab.mu != fa.mu * fb.mu:
            return False, f"phi/mu({a},{b})"
    return True, ""


@_check("kronecker = Legendre by square enumeration, odd p < 300")
def kronecker_vs_squares():
    for p in arith.primes_up_to(300)[1:]:
        squares = {x * x % p for x in range(1, p)}
        for a in range(-299, 300):
            want = 0 if a % p == 0 else (1 if a % p in squares else -1)
            if arith.kronecker(a, p) != want:
                return False, f"({a}/{p})"
    return True, ""


# ---------------------------------------------------------------- classno

@_check("H(n) = sum of h_w(-n/f^2), n <= 5000")
def hurwitz_identity(limit=5000):
    for n in range(1, limit + 1):
        if n % 4 in (0, 3) and classno.hurwitz(n) != classno.hurwitz_by_orders(n):
            return False, f"n={n}"
    return True, ""


@_check("sum_{t^2<4n} H(4n-t^2) < 2 sigma1(n) - 1, 2 <= n <= 300")
def hurwitz_sum_bound(limit=300):
    for n in range(2, limit + 1):
        t = 0
        s = Fraction(0)
        while t * t < 4 * n:
            s += classno.hurwitz(4 * n - t * t) * (1 if t == 0 else 2)
            t += 1
        if not s < 2 * arith.sigma1(n) - 1:
            return False, f"n={n}: {s}"
    return True, ""


@_check("12 H(n) integral, n <= 5000")
def hurwitz_integrality(limit=5000):
    bad = [n for n in range(limit + 1) if (12 * classno.hurwitz(n)).denominator != 1]
    return not bad, f"n={bad[:5]}" if bad else ""


@_check("#reduced forms = h_w(D) u(D) for fundamental D")
def forms_vs_hw(limit=3000):
    for m in range(3, limit + 1):
        D = -m
        if not _is_fundamental(D):
            continue
        if len(classno.reduced_forms(D)) != classno.h_weighted(D) * classno.unit_index(D):
            return False, f"D={D}"
    return True, ""


def _is_fundamental(D):
    if D % 4 == 1:
        return arith.is_squarefree(-D)
    if D % 4 == 0:
        m = D // 4
        return m % 4 in (2, 3) and arith.is_squarefree(-m)
    return False


# ---------------------------------------------------------------- traces

def squarefree_levels(limit, start=1):
    return [N for N in range(start, limit + 1) if arith.mobius_omega_phi(N).squarefree]


def bound_grid(Nmax=500, ks=(2, 4, 6, 8), ns=(2, 3, 5, 6, 7), need_large=True):
    for k in ks:
        for N in squarefree_levels(Nmax, 2):
            for n in ns:
                if gcd(n, N) != 1 or (need_large and N <= 4 * n):
                    continue
                yield traces.TraceQuery(k, N, n)


@_check("signed split identities and integrality, N <= 500")
def signed_split(Nmax=500):
    for q in bound_grid(Nmax, need_large=False):
        st = traces.trace_signed(q)
        s = (-1) ** (q.k // 2)
        if st.tr_plus + st.tr_minus != st.tr_new or st.tr_plus - st.tr_minus != s * st.tr_new_WN:
            return False, str(q)
    return True, ""


@_check("trace of T_n on S_2^new(N) = sum of a_n over fixture curves")
def trace_vs_curves(levels=ORACLE_LEVELS, nmax=50):
    with open(fixture_path("newform_levels")) as fh:
        recs = list(curves.parse_dataset(fh, isogeny_classes=True))
    for N in levels:
        cls = [r for r in recs if r.conductor == N]
        for n in range(2, nmax + 1):
            if gcd(n, N) != 1 or isqrt(n) ** 2 == n:
                continue
            want = sum(curves.an(r.curve, n) for r in cls)
            got = traces.trace_new_Tn(traces.TraceQuery(2, N, n))
            if want != got:
                return False, f"N={N} n={n}: {got} != {want}"
    return True, ""


@_check("trace bounds (explicit-formula bound and signed bound), N <= 500")
def trace_bounds(Nmax=500):
    for q in bound_grid(Nmax):
        if not abs(traces.trace_new_Tn(q)) < traces.ms_bound(q):
            return False, f"ms bound {q}"
        if not traces.prop_bound_check(q).ok:
            return False, f"signed bound {q}"
    return True, ""


@_check("separation tr+ - tr- = H(4nN)/2 - sigma1(n) for k=2, N > 4n")
def separation_identity(Nmax=500):
    for q in bound_grid(Nmax, ks=(2,)):
        st = traces.trace_signed(q)
        if st.tr_plus - st.tr_minus != classno.hurwitz(4 * q.n * q.N) / 2 - arith.sigma1(q.n):
            return False, str(q)
    return True, ""


def growth_stats(lo=1000, hi=5000, n=2):
    ps = [p for p in arith.primes_up_to(hi) if p >= lo]
    plus = np.array([traces.trace_signed(traces.TraceQuery(2, N, n)).tr_plus for N in ps])
    minus = np.array([traces.trace_signed(traces.TraceQuery(2, N, n)).tr_minus for N in ps])
    x = np.log(np.array(ps, dtype=float))

    def slope(v):
        m = v != 0
        return float(np.polyfit(x[m], np.log(np.abs(v[m]).astype(float)), 1)[0])

    return {
        "sign_plus": float(np.mean(plus > 0)),
        "sign_minus": float(np.mean(minus < 0)),
        "slope_plus": slope(plus),
        "slope_minus": slope(minus),
    }


@_check("growth of tr^+- (k=2, n=2) over primes in [1000, 5000]")
def growth():
    g = growth_stats()
    ok = (g["sign_plus"] >= 0.95 and g["sign_minus"] >= 0.95
          and 0.35 <= g["slope_plus"] <= 0.65 and 0.35 <= g["slope_minus"] <= 0.65)
    return ok, ", ".join(f"{k}={v:.4f}" for k, v in g.items())


@_check("|dim+ - phi(N)/12| <= 2 sqrt(N) log N, k=2, squarefree N <= 5000")
def dimension_estimate(Nmax=5000):
    for N in squarefree_levels(Nmax, 2):
        d = traces.dim_new_signed(2, N)
        if abs(d.dim_plus - arith.mobius_omega_phi(N).phi / 12) > 2 * sqrt(N) * log(N):
            return False, f"N={N}"
    return True, ""


# ---------------------------------------------------------------- curves

def _fixture_records(name="newform_levels", **kw):
    from .curves import open_dataset

    with open_dataset(fixture_path(name)) as fh:
        return list(curves.parse_dataset(fh, **kw))


@_check("Hasse bound on the fixture extract, p <= 97")
def hasse_fixture():
    recs = _fixture_records("allcurves_20000", isogeny_classes=True)
    primes = arith.primes_up_to(97)
    t = curves.batch_ap(recs, primes)
    lim = 2 * np.sqrt(np.array(primes, dtype=float))
    ok = bool(np.all((np.abs(t.values) <= lim[None, :]) | ~t.good))
    return ok, ""


@_check("character sum = point enumeration, fixture curves, p <= 50")
def charsum_vs_enumeration():
    for r in _fixture_records():
        for p in arith.primes_up_to(50):
            if r.curve.discriminant % p == 0:
                continue
            if curves.ap(r.curve, p) != p + 1 - curves.count_points(r.curve, p):
                return False, f"{r.curve.label} p={p}"
    return True, ""


@_check("allcurves parse/format round trip")
def roundtrip():
    with open(fixture_path("newform_levels")) as fh:
        lines = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    recs = list(curves.parse_dataset(lines))
    return [curves.format_allcurves(r) for r in recs] == lines, ""


# ---------------------------------------------------------------- bias

@_check("no record with p | N enters any stratum")
def exclusion_rule(p=7):
    recs = _fixture_records("allcurves_20000", isogeny_classes=True)
    series = ec_bias_series(recs, p, WEIGHTS["unwt"], mode="all", X_max=20000)
    admitted = sum(1 for r in recs if r.conductor % p and r.curve.discriminant % p)
    return series[0].final()[2] == admitted, f"count={series[0].final()[2]} admitted={admitted}"


@_check("rank ordering A0 > A1 > A2 at X = 20000, log weight, p = 7, 11")
def rank_ordering():
    recs = _fixture_records("allcurves_20000", isogeny_classes=True)
    out = []
    ok = True
    for p in (7, 11):
        s = {x.stratum.r_or_sign: x.final()[1] for x in
             ec_bias_series(recs, p, WEIGHTS["log"], X_max=20000)}
        ok &= s[0] > s[1] > s[2]
        out.append(f"p={p}: " + ", ".join(f"A{r}={s[r]:.3f}" for r in (0, 1, 2)))
    return ok, "; ".join(out)


SUITES = {
    "arith": [factor_roundtrip, multiplicativity, kronecker_vs_squares],
    "classno": [hurwitz_identity, hurwitz_sum_bound, hurwitz_integrality, forms_vs_hw],
    "traces": [signed_split, trace_vs_curves, trace_bounds, separation_identity, growth,
               dimension_estimate],
    "curves": [hasse_fixture, charsum_vs_enumeration, roundtrip],
    "bias": [exclusion_rule, rank_ordering],
}


def run_suite(name, out=print):
    """Run one suite, printing a line per check; returns True when all pass."""
    all_ok = True
    for check in SUITES[name]:
        ok, detail = check()
        all_ok &= bool(ok)
        line = f"[{'PASS' if ok else 'FAIL'}] {name}: {check.check_name}"
        out(line + (f" ({detail})" if detail else ""))
    return all_ok

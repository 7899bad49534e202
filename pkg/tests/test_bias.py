import io
import math
from math import fsum

import numpy as np
import pytest
from hypothesis import given, strategies as st

from apbias.bias import (OVERFLOW_RANK, WEIGHTS, Accumulator, BiasSeries, StratumKey, WeightFunction,
                         checkpoint_grid, dat_filename, ec_bias_series, emit_dat, format_value,
                         weight_eval, weight_from_name, weighted_height_variant, write_series)
from apbias.curves import CurveRecord, WeierstrassCurve, ap

E11 = WeierstrassCurve(0, -1, 1, -10, -20, "11a1")
E37 = WeierstrassCurve(0, 0, 1, -1, 0, "37a1")


def rec(c, N, rank=0, height=None):
    return CurveRecord(c, N, rank, height=height)


# ---------------------------------------------------------------- weights

def test_weight_examples():
    assert weight_eval(WEIGHTS["unwt"], 11) == 1
    assert weight_eval(WeightFunction("power", 1.0), 37) == 37
    assert weight_eval(WEIGHTS["log"], 20) == pytest.approx(2.9957322735539909, abs=1e-12)
    assert weight_eval(WEIGHTS["loglog"], 3) > 0


@pytest.mark.parametrize("name", sorted(WEIGHTS))
def test_weights_positive_and_non_decreasing(name):
    phi = WEIGHTS[name]
    vals = phi.evaluate_array(np.arange(11, 50000))
    assert np.all(vals > 0) and np.all(np.diff(vals) >= 0)
    assert [phi(N) for N in (11, 500, 49999)] == pytest.approx(list(phi.evaluate_array([11, 500, 49999])))


@given(st.sampled_from(["power", "log_power"]), st.floats(0.01, 8.0), st.integers(11, 10**8))
def test_weight_monotone_property(kind, delta, N):
    phi = WeightFunction(kind, delta)
    assert 0 < phi(N) <= phi(N + 1)


def test_weight_domain_and_growth_limits():
    with pytest.raises(ValueError):
        weight_eval(WEIGHTS["log"], 1)
    with pytest.raises(ValueError):
        weight_eval(WEIGHTS["loglog"], 2)
    with pytest.raises(ValueError):
        WeightFunction("power", 9)
    with pytest.raises(ValueError):
        WeightFunction("power", 0)
    with pytest.raises(ValueError):
        WeightFunction("exp")


def test_weight_names():
    assert weight_from_name("log", 2).name == "log2"
    assert weight_from_name("power", 0.5).name == "sqrt"
    assert weight_from_name("x").name == "x"
    with pytest.raises(ValueError):
        weight_from_name("bogus")


# ---------------------------------------------------------------- strata and grid

def test_stratum_key_validation():
    assert StratumKey("by_rank", 3, 7, "log").tag == "r3"
    assert StratumKey("by_rank", OVERFLOW_RANK, 7, "log").tag == "rover"
    assert StratumKey("by_root_number", -1, 7, "log").tag == "wminus"
    with pytest.raises(ValueError):
        StratumKey("by_rank", 10, 7, "log")
    with pytest.raises(ValueError):
        StratumKey("by_root_number", 0, 7, "log")
    with pytest.raises(ValueError):
        StratumKey("by_parity", 0, 7, "log")


def test_checkpoint_grid():
    assert checkpoint_grid(1000, 4) == [250, 500, 750, 1000]
    assert checkpoint_grid(20000)[-1] == 20000 and len(checkpoint_grid(20000)) == 200
    assert checkpoint_grid(5, 200) == [1, 2, 3, 4, 5]
    with pytest.raises(ValueError):
        checkpoint_grid(0)


# ---------------------------------------------------------------- accumulator

@given(st.lists(st.floats(-1e12, 1e12, allow_nan=False), min_size=1, max_size=300))
def test_accumulator_close_to_exact_sum(xs):
    acc = Accumulator()
    for x in xs:
        acc.add(x)
    exact = fsum(xs)
    assert acc.count == len(xs)
    assert abs(acc.weighted_sum - exact) <= 1e-9 * max(1.0, fsum(abs(x) for x in xs))


def test_accumulator_beats_naive_sum():
    xs = [1e16, 1.0, -1e16] * 1000
    acc = Accumulator()
    for x in xs:
        acc.add(x)
    assert acc.weighted_sum == 1000.0


# ---------------------------------------------------------------- series

def test_single_record_example():
    (s,) = ec_bias_series([rec(E11, 11)], 7, WEIGHTS["unwt"], X_max=11)
    assert s.stratum.tag == "r0"
    assert s.final() == (11, -2.0, 1)


def test_excluded_record_gives_no_series():
    assert ec_bias_series([rec(E11, 11)], 11, WEIGHTS["unwt"], X_max=11) == []


def test_two_record_power_weight():
    (s,) = ec_bias_series([rec(E11, 11), rec(E37, 37)], 2, WeightFunction("power", 1.0), X_max=37)
    assert s.final()[1] == pytest.approx((ap(E11, 2) * 11 + ap(E37, 2) * 37) / 2)


def test_unsorted_input_rejected():
    with pytest.raises(ValueError, match="sorted"):
        ec_bias_series([rec(E37, 37), rec(E11, 11)], 2, WEIGHTS["unwt"], X_max=40)


def test_high_ranks_go_to_overflow():
    (s,) = ec_bias_series([rec(E11, 11, rank=12)], 7, WEIGHTS["unwt"], X_max=11)
    assert s.stratum.overflow and s.stratum.tag == "rover"


def test_nonprime_p_rejected():
    with pytest.raises(ValueError):
        ec_bias_series([rec(E11, 11)], 9, WEIGHTS["unwt"], X_max=11)


def test_inclusive_cutoff_and_past_xmax():
    recs = [rec(E11, 11), rec(E37, 37), rec(E11, 50)]
    (s,) = ec_bias_series(recs, 7, WEIGHTS["unwt"], X_max=37, checkpoints=2)
    assert [(X, n) for X, _, n in s.checkpoints] == [(19, 1), (37, 2)]


def test_by_root_number_mode():
    recs = [rec(E11, 11, 0), rec(E37, 37, 1)]
    out = ec_bias_series(recs, 2, WEIGHTS["unwt"], mode="by_root_number", X_max=37)
    assert {s.stratum.tag: s.final()[1] for s in out} == {"wplus": -2.0, "wminus": -2.0}


def test_value_at():
    s = BiasSeries(StratumKey("all", 0, 7, "unwt"), [(10, 1.0, 1), (20, 2.0, 2)])
    assert s.value_at(5) is None and s.value_at(15) == 1.0 and s.value_at(20) == 2.0


def test_exclusion_audit(class_reps):
    for p in (2, 7, 11):
        out = ec_bias_series(class_reps, p, WEIGHTS["unwt"], mode="by_rank", X_max=20000)
        counted = sum(s.final()[2] for s in out)
        admitted = [r for r in class_reps if r.conductor % p and r.curve.discriminant % p]
        assert counted == len(admitted)
        # a record with p | N cannot change anything: drop them all and compare
        kept = [r for r in class_reps if r.conductor % p]
        again = ec_bias_series(kept, p, WEIGHTS["unwt"], mode="by_rank", X_max=20000)
        assert [s.checkpoints for s in again] == [s.checkpoints for s in out]


def test_denominator_discipline(class_reps):
    out = ec_bias_series(class_reps[:20000], 13, WEIGHTS["log"], X_max=None)
    tab = {}
    for r in class_reps[:20000]:
        if r.conductor % 13 and r.curve.discriminant % 13:
            tab.setdefault(min(r.rank, OVERFLOW_RANK), []).append((r.conductor, ap(r.curve, 13) * math.log(r.conductor)))
    for s in out:
        rows = tab[s.stratum.r_or_sign]
        for X, v, n in s.checkpoints[::17]:
            terms = [t for N, t in rows if N <= X]
            assert n == len(terms)
            assert abs(v * n - fsum(terms)) <= 1e-9 * max(1.0, abs(fsum(terms)))


def test_determinism_across_workers(class_reps, tmp_path):
    outs = []
    for workers in (1, 2, 4):
        series = ec_bias_series(class_reps, 7, WEIGHTS["log"], X_max=20000, workers=workers,
                                chunk_size=10000)
        d = tmp_path / f"w{workers}"
        outs.append({p.split("/")[-1]: open(p, "rb").read() for p in write_series(d, "ec", series)})
    assert outs[0] == outs[1] == outs[2]


# ---------------------------------------------------------------- height variant

def test_height_variant_examples():
    r = rec(E11, 11, height=48)
    const = weighted_height_variant([r], 7, WEIGHTS["unwt"], X_max=48)
    assert const[0].final()[1] == ec_bias_series([r], 7, WEIGHTS["unwt"], X_max=11)[0].final()[1]
    (s,) = weighted_height_variant([r], 7, WeightFunction("power", 1.0), X_max=48)
    assert s.final()[1] == -96.0
    with pytest.raises(ValueError):
        weighted_height_variant([rec(E11, 11)], 7, WEIGHTS["unwt"])


# ---------------------------------------------------------------- output

def test_emit_dat_examples():
    key = StratumKey("by_rank", 0, 7, "log")
    sink = io.BytesIO()
    emit_dat(BiasSeries(key, [(1000, -2.0, 5)]), sink)
    assert sink.getvalue() == b"1000 -2.00000\n"
    sink = io.BytesIO()
    emit_dat(BiasSeries(key, [(10, 0.5, 1), (20, 123456.789, 2)]), sink)
    assert sink.getvalue() == b"10 0.500000\n20 123457\n"
    with pytest.raises(ValueError):
        emit_dat(BiasSeries(key, []), io.BytesIO())


@given(st.floats(-1e9, 1e9, allow_nan=False))
def test_format_value_six_significant_digits(v):
    s = format_value(v)
    assert "e" not in s.lower()
    assert float(s) == pytest.approx(v, rel=5e-6, abs=1e-300)


def test_dat_filename():
    s = BiasSeries(StratumKey("by_rank", 0, 7, "log"))
    assert dat_filename("prime", s) == "prime_log_r0_p7.dat"

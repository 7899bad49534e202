"""Rank- and root-number-stratified weighted averages of a_p.

For a family of curves ordered by conductor (or height), a stratum S and a
weight function phi, the average at X is

    A_S(p, X; phi) = sum_{E in S, |E| <= X, p not | N_E} a_p(E) phi(N_E) / #{E in S, |E| <= X}

where excluded curves (p | N_E or bad reduction of the stored model) enter
neither numerator nor denominator.  Values are recorded on a fixed grid of X
and written as two-column ``.dat`` files.
"""

import math
import os
import sys
from dataclasses import dataclass, field
from decimal import Decimal
from itertools import islice

import numpy as np

from .arith import is_prime
from .curves import batch_ap, root_number_proxy

MAX_RANK = 8
OVERFLOW_RANK = MAX_RANK + 1
PROGRESS_EVERY = 10**6


@dataclass(frozen=True)
class WeightFunction:
    """phi(N) = 1, N^delta, (log N)^delta or log log N (natural log)."""

    kind: str
    delta: float = 1.0
    name: str = ""

    KINDS = ("constant", "power", "log_power", "loglog")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if self.kind in ("power", "log_power"):
            if not self.delta > 0:
                raise ValueError("weight exponent must be positive")
            if self.kind == "power" and self.delta > 8:
                raise ValueError("power weights limited to delta <= 8 (polynomial growth)")
        if not self.name:
            object.__setattr__(self, "name", self._default_name())

    def _default_name(self):
        if self.kind == "constant":
            return "unwt"
        if self.kind == "loglog":
            return "loglog"
        base = "x" if self.kind == "power" else "log"
        d = self.delta
        if d == 1:
            return base
        if self.kind == "power" and d == 0.5:
            return "sqrt"
        return f"{base}{d:g}"

    @property
    def min_arg(self):
        """Smallest N with phi(N) > 0."""
        return {"constant": 1, "power": 1, "log_power": 2, "loglog": 3}[self.kind]

    def __call__(self, N):
        return weight_eval(self, N)

    def evaluate_array(self, N):
        N = np.asarray(N, dtype=np.float64)
        if N.size and N.min() < self.min_arg:
            raise ValueError(f"weight {self.name}: argument below domain N >= {self.min_arg}")
        if self.kind == "constant":
            return np.ones_like(N)
        if self.kind == "power":
            return N**self.delta
        if self.kind == "log_power":
            return np.log(N) ** self.delta
        return np.log(np.log(N))


WEIGHTS = {
    "unwt": WeightFunction("constant"),
    "sqrt": WeightFunction("power", 0.5),
    "x": WeightFunction("power", 1.0),
    "x2": WeightFunction("power", 2.0),
    "log": WeightFunction("log_power", 1.0),
    "loglog": WeightFunction("loglog"),
    "log2": WeightFunction("log_power", 2.0),
}


def weight_from_name(name, delta=None):
    """Resolve a weight from its menu name, or from a kind plus exponent."""
    if name in WEIGHTS and delta is None:
        return WEIGHTS[name]
    aliases = {"constant": "constant", "unwt": "constant", "power": "power", "x": "power",
               "log": "log_power", "log_power": "log_power", "loglog": "loglog"}
    if name not in aliases:
        raise ValueError(f"unknown weight {name!r}; choose from {sorted(WEIGHTS)} or power/log_power")
    kind = aliases[name]
    return WeightFunction(kind, 1.0 if delta is None else float(delta))


def weight_eval(phi, N):
    if N < phi.min_arg:
        raise ValueError(f"weight {phi.name}: N = {N} outside domain N >= {phi.min_arg}")
    if phi.kind == "constant":
        return 1.0
    if phi.kind == "power":
        return float(N) ** phi.delta
    if phi.kind == "log_power":
        return math.log(N) ** phi.delta
    return math.log(math.log(N))


@dataclass(frozen=True)
class StratumKey:
    mode: str
    r_or_sign: int
    p: int
    weight_id: str

    def __post_init__(self):
        if self.mode == "by_rank":
            if not 0 <= self.r_or_sign <= OVERFLOW_RANK:
                raise ValueError(f"rank stratum out of range: {self.r_or_sign}")
        elif self.mode == "by_root_number":
            if self.r_or_sign not in (1, -1):
                raise ValueError("root number stratum must be +1 or -1")
        elif self.mode != "all":
            raise ValueError(f"unknown stratification mode {self.mode!r}")

    @property
    def overflow(self):
        return self.mode == "by_rank" and self.r_or_sign == OVERFLOW_RANK

    @property
    def tag(self):
        if self.mode == "by_rank":
            return "rover" if self.overflow else f"r{self.r_or_sign}"
        if self.mode == "by_root_number":
            return "wplus" if self.r_or_sign == 1 else "wminus"
        return "all"


MODES = ("by_rank", "by_root_number", "all")


def stratum_of(mode, rec):
    if mode == "by_rank":
        return min(rec.rank, OVERFLOW_RANK)
    if mode == "by_root_number":
        return root_number_proxy(rec)
    return 0


class Accumulator:
    """Neumaier-compensated running sum plus an exact count."""

    __slots__ = ("_sum", "_comp", "count")

    def __init__(self):
        self._sum = 0.0
        self._comp = 0.0
        self.count = 0

    def add(self, x, n=1):
        s = self._sum
        t = s + x
        if abs(s) >= abs(x):
            self._comp += (s - t) + x
        else:
            self._comp += (x - t) + s
        self._sum = t
        self.count += n

    @property
    def weighted_sum(self):
        return self._sum + self._comp

    def value(self):
        return self.weighted_sum / self.count


@dataclass
class BiasSeries:
    stratum: StratumKey
    checkpoints: list = field(default_factory=list)

    def final(self):
        return self.checkpoints[-1] if self.checkpoints else None

    def value_at(self, X):
        """Value of the last checkpoint at or below X (None if there is none)."""
        best = None
        for cx, v, _ in self.checkpoints:
            if cx > X:
                break
            best = v
        return best


def checkpoint_grid(X_max, count=200):
    """``count`` evenly spaced integer X values ending at X_max (duplicates dropped)."""
    if X_max < 1 or count < 1:
        raise ValueError("checkpoint grid needs X_max >= 1 and count >= 1")
    grid = []
    for j in range(1, count + 1):
        x = (X_max * j + count // 2) // count
        if x >= 1 and (not grid or x > grid[-1]):
            grid.append(x)
    return grid


class SeriesBuilder:
    """Accumulates per-stratum sums along a non-decreasing key and snapshots them on a grid."""

    def __init__(self, grid, make_key):
        self.grid = grid
        self._next = 0
        self._make_key = make_key
        self.acc = {}
        self.series = {}
        self._last_key = None

    @property
    def X_max(self):
        return self.grid[-1]

    def advance(self, key):
        """Move to ordering key ``key``; returns False once past X_max."""
        if self._last_key is not None and key < self._last_key:
            raise ValueError(f"input not sorted: key {key} after {self._last_key}")
        self._last_key = key
        while self._next < len(self.grid) and self.grid[self._next] < key:
            self._snapshot(self.grid[self._next])
            self._next += 1
        return key <= self.X_max

    def add(self, stratum, x, n=1):
        acc = self.acc.get(stratum)
        if acc is None:
            acc = self.acc[stratum] = Accumulator()
            self.series[stratum] = BiasSeries(self._make_key(stratum))
        acc.add(x, n)

    def _snapshot(self, X):
        for s, acc in self.acc.items():
            if acc.count:
                self.series[s].checkpoints.append((X, acc.value(), acc.count))

    def finish(self):
        while self._next < len(self.grid):
            self._snapshot(self.grid[self._next])
            self._next += 1
        return [self.series[s] for s in sorted(self.series) if self.series[s].checkpoints]


def ec_bias_series(records, p, phi, mode="by_rank", X_max=None, checkpoints=200,
                   order_by="conductor", weight_by="conductor", workers=1,
                   chunk_size=16384, progress=None):
    """Streaming weighted averages of a_p over a sorted record stream.

    ``records`` must be non-decreasing in ``order_by`` (``"conductor"`` or
    ``"height"``).  Returns one :class:`BiasSeries` per occupied stratum.
    ``X_max`` defaults to the largest key seen, which requires materialising
    the stream.
    """
    if not is_prime(p):
        raise ValueError(f"p must be prime, got {p}")
    if mode not in MODES:
        raise ValueError(f"unknown stratification mode {mode!r}")
    if order_by not in ("conductor", "height") or weight_by not in ("conductor", "height"):
        raise ValueError("order_by/weight_by must be 'conductor' or 'height'")
    if X_max is None:
        records = list(records)
        if not records:
            return []
        X_max = max(_key(r, order_by) for r in records)
    builder = SeriesBuilder(checkpoint_grid(X_max, checkpoints),
                            lambda s: StratumKey(mode, s, p, phi.name))
    it = iter(records)
    seen = 0
    done = False
    executor = _make_executor(workers)
    try:
        while not done:
            chunk = list(islice(it, chunk_size))
            if not chunk:
                break
            table = batch_ap(chunk, [p], workers=workers, executor=executor)
            vals = table.values[:, 0]
            good = table.good[:, 0]
            wargs = [_key(r, weight_by) for r in chunk]
            for i, rec in enumerate(chunk):
                if not builder.advance(_key(rec, order_by)):
                    done = True
                    break
                if good[i]:
                    s = stratum_of(mode, rec)
                    builder.add(s, int(vals[i]) * weight_eval(phi, wargs[i]))
                seen += 1
                if progress is not None and seen % PROGRESS_EVERY == 0:
                    progress(seen)
    finally:
        if executor is not None:
            executor.shutdown()
    return builder.finish()


def weighted_height_variant(records, p, phi, mode="by_rank", X_max=None, checkpoints=200, **kw):
    """As :func:`ec_bias_series` for a height-ordered family, weighting by phi(H_E)."""
    records = list(records)
    for r in records:
        if r.height is None:
            raise ValueError(f"record {r.curve.label or r.curve.ainvs} has no height")
    return ec_bias_series(records, p, phi, mode=mode, X_max=X_max, checkpoints=checkpoints,
                          order_by="height", weight_by="height", **kw)


def _key(rec, which):
    if which == "conductor":
        return rec.conductor
    if rec.height is None:
        raise ValueError("height ordering requested but record has no height")
    return rec.height


def _make_executor(workers):
    if workers is None or workers <= 1:
        return None
    from concurrent.futures import ProcessPoolExecutor

    return ProcessPoolExecutor(max_workers=workers)


def format_value(v):
    """Six significant digits in positional notation."""
    if v == 0:
        v = 0.0
    s = format(Decimal(f"{v:.5e}"), "f")
    return s


def emit_dat(series, sink):
    """Write ``X value`` lines to a binary sink."""
    if not series.checkpoints:
        raise ValueError("cannot emit an empty series")
    lines = "".join(f"{X} {format_value(v)}\n" for X, v, _ in series.checkpoints)
    sink.write(lines.encode("ascii"))


def dat_filename(family, series):
    k = series.stratum
    return f"{family}_{k.weight_id}_{k.tag}_p{k.p}.dat"


def write_series(out_dir, family, series_list):
    """Write one ``.dat`` file per series into ``out_dir``; returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for s in series_list:
        path = os.path.join(out_dir, dat_filename(family, s))
        with open(path, "wb") as fh:
            emit_dat(s, fh)
        paths.append(path)
    return paths


def report_progress(n):
    print(f"[apbias] {n} records", file=sys.stderr, flush=True)

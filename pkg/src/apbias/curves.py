"""Weierstrass curves, a_p by point counting, and curve dataset ingestion.

Datasets are expected to store minimal models (true for Cremona and
Stein-Watkins data), so good reduction at p is tested as p not dividing the
discriminant of the stored model.
"""

import csv
import gzip
import io
import logging
import re
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .arith import factor, is_prime

log = logging.getLogger(__name__)

MAX_BATCH_PRIME = 1000
MAX_SANE_RANK = 28
_BLOCK = 4096


class BadReduction(ValueError):
    """p divides the discriminant: skip this (curve, p) pair."""


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class WeierstrassCurve:
    a1: int
    a2: int
    a3: int
    a4: int
    a6: int
    label: str = ""

    @classmethod
    def from_ainvs(cls, ainvs, label=""):
        a1, a2, a3, a4, a6 = (int(a) for a in ainvs)
        return cls(a1, a2, a3, a4, a6, label)

    @property
    def ainvs(self):
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    @property
    def b_invariants(self):
        a1, a2, a3, a4, a6 = self.ainvs
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        return b2, b4, b6, b8

    @property
    def discriminant(self):
        return discriminant(self)


def discriminant(c):
    b2, b4, b6, b8 = c.b_invariants
    return -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6


@dataclass(frozen=True)
class CurveRecord:
    curve: WeierstrassCurve
    conductor: int
    rank: int
    height: int | None = None
    class_id: str | None = None
    torsion: int | None = None

    def __post_init__(self):
        if self.conductor < 11:
            raise ValueError(f"conductor {self.conductor} < 11")
        if not 0 <= self.rank <= MAX_SANE_RANK:
            raise ValueError(f"rank {self.rank} outside [0, {MAX_SANE_RANK}]")
        if self.height is not None and self.height <= 0:
            raise ValueError("height must be positive")


def root_number_proxy(r):
    """(-1)^rank: the root number under the parity conjecture."""
    return 1 if r.rank % 2 == 0 else -1


@dataclass(frozen=True)
class CharTable:
    p: int
    table: np.ndarray

    def __getitem__(self, x):
        return int(self.table[x % self.p])


@lru_cache(maxsize=None)
def char_table(p):
    """Quadratic character mod an odd prime p as an int8 lookup table."""
    if p == 2 or not is_prime(p):
        raise ValueError(f"character table needs an odd prime, got {p}")
    t = np.full(p, -1, dtype=np.int8)
    t[0] = 0
    t[(np.arange(1, p, dtype=np.int64) ** 2) % p] = 1
    t.setflags(write=False)
    return CharTable(p, t)


def count_points(c, p):
    """#E(F_p) by enumerating all (x, y) plus the point at infinity."""
    a1, a2, a3, a4, a6 = (a % p for a in c.ainvs)
    n = 1
    for x in range(p):
        rhs = (x * x * x + a2 * x * x + a4 * x + a6) % p
        for y in range(p):
            if (y * y + a1 * x * y + a3 * y - rhs) % p == 0:
                n += 1
    return n


def ap(c, p, t=None):
    """a_p = p + 1 - #E(F_p) at a prime of good reduction."""
    if not is_prime(p):
        raise ValueError(f"p must be prime, got {p}")
    if discriminant(c) % p == 0:
        raise BadReduction(f"{c.label or c.ainvs}: bad reduction at {p}")
    if p <= 3:
        return p + 1 - count_points(c, p)
    if t is None:
        t = char_table(p)
    elif t.p != p:
        raise ValueError("character table is for a different prime")
    b2, b4, b6, _ = c.b_invariants
    b2, b4, b6 = b2 % p, (2 * b4) % p, b6 % p
    s = 0
    for x in range(p):
        s += t.table[(((4 * x + b2) * x + b4) * x + b6) % p]
    return -int(s)


def an(c, n):
    """n-th Fourier coefficient of the attached newform, n coprime to the bad primes."""
    if n < 1:
        raise ValueError("n must be positive")
    result = 1
    for q, e in factor(n):
        a = ap(c, q)
        prev, cur = 1, a
        for _ in range(e - 1):
            prev, cur = cur, a * cur - q * prev
        result *= cur
    return result


# ---------------------------------------------------------------- batch a_p

class ApTable:
    """a_p values for records x primes; ``good`` is False where the pair is skipped."""

    SKIP = None

    def __init__(self, primes, values, good):
        self.primes = list(primes)
        self.values = values
        self.good = good
        self._col = {p: j for j, p in enumerate(self.primes)}

    def __len__(self):
        return self.values.shape[0] * self.values.shape[1]

    def __getitem__(self, key):
        i, p = key
        j = self._col[p]
        return int(self.values[i, j]) if self.good[i, j] else self.SKIP

    def items(self):
        for i in range(self.values.shape[0]):
            for j, p in enumerate(self.primes):
                yield (i, p), (int(self.values[i, j]) if self.good[i, j] else self.SKIP)

    def as_dict(self):
        return dict(self.items())


def _residues(col, p):
    return (np.array(col, dtype=object) % p).astype(np.int64)


def _ap_block_odd(b2, b4x2, b6, p):
    x = np.arange(p, dtype=np.int64)
    cubic = (4 * x * x % p) * x % p
    x2 = x * x % p
    v = (cubic[None, :] + b2[:, None] * x2[None, :] + b4x2[:, None] * x[None, :] + b6[:, None]) % p
    return -char_table(p).table[v].sum(axis=1, dtype=np.int64)


def _ap_block_small(ainvs, p):
    a1, a2, a3, a4, a6 = ainvs
    n = np.ones(a1.shape[0], dtype=np.int64)
    for x in range(p):
        rhs = (x**3 + a2 * x * x + a4 * x + a6) % p
        for y in range(p):
            n += ((y * y + a1 * x * y + a3 * y - rhs) % p == 0)
    return p + 1 - n


def _batch_shard(curves_data, primes):
    ainv_cols, b_cols, discs, conductors = curves_data
    m = len(discs)
    values = np.zeros((m, len(primes)), dtype=np.int32)
    good = np.zeros((m, len(primes)), dtype=bool)
    for j, p in enumerate(primes):
        g = (_residues(discs, p) != 0) & (np.asarray(conductors, dtype=np.int64) % p != 0)
        good[:, j] = g
        for lo in range(0, m, _BLOCK):
            sl = slice(lo, min(m, lo + _BLOCK))
            if p <= 3:
                res = _ap_block_small([_residues(col[sl], p) for col in ainv_cols], p)
            else:
                b2, b4, b6 = (_residues(col[sl], p) for col in b_cols)
                res = _ap_block_odd(b2, 2 * b4 % p, b6, p)
            values[sl, j] = res
    values[~good] = 0
    return values, good


def _prepare(records):
    ainv_cols = [[], [], [], [], []]
    b_cols = [[], [], []]
    discs, conductors = [], []
    for r in records:
        c = r.curve
        for col, a in zip(ainv_cols, c.ainvs):
            col.append(a)
        b2, b4, b6, _ = c.b_invariants
        b_cols[0].append(b2)
        b_cols[1].append(b4)
        b_cols[2].append(b6)
        discs.append(discriminant(c))
        conductors.append(r.conductor)
    return ainv_cols, b_cols, discs, conductors


def _slice_data(data, lo, hi):
    ainv_cols, b_cols, discs, conductors = data
    return ([c[lo:hi] for c in ainv_cols], [c[lo:hi] for c in b_cols],
            discs[lo:hi], conductors[lo:hi])


def batch_ap(records, primes, workers=1, executor=None):
    """a_p for every (record, prime) pair; pairs with p | disc or p | N are skipped.

    Records are split into contiguous shards when ``workers > 1``; each shard
    writes its own rows, so the table does not depend on the worker count.
    """
    records = list(records)
    primes = list(primes)
    for p in primes:
        if not is_prime(p) or p > MAX_BATCH_PRIME:
            raise ValueError(f"batch primes must be primes <= {MAX_BATCH_PRIME}, got {p}")
    if not records or not primes:
        return ApTable(primes, np.zeros((len(records), len(primes)), dtype=np.int32),
                       np.zeros((len(records), len(primes)), dtype=bool))
    data = _prepare(records)
    m = len(records)
    if (workers or 1) <= 1 and executor is None:
        values, good = _batch_shard(data, primes)
        return ApTable(primes, values, good)
    nshards = max(1, workers or 1)
    bounds = [m * i // nshards for i in range(nshards + 1)]
    shards = [_slice_data(data, bounds[i], bounds[i + 1]) for i in range(nshards)]
    own = executor is None
    if own:
        from concurrent.futures import ProcessPoolExecutor

        executor = ProcessPoolExecutor(max_workers=nshards)
    try:
        parts = list(executor.map(_batch_shard, shards, [primes] * nshards))
    finally:
        if own:
            executor.shutdown()
    values = np.concatenate([v for v, _ in parts])
    good = np.concatenate([g for _, g in parts])
    return ApTable(primes, values, good)


# ---------------------------------------------------------------- datasets

_AINVS = re.compile(r"^\[\s*(-?\d+)\s*,\s*(-?\d+)\s*,\s*(-?\d+)\s*,\s*(-?\d+)\s*,\s*(-?\d+)\s*\]$")

CSV_REQUIRED = ("conductor", "rank", "a1", "a2", "a3", "a4", "a6")
CSV_OPTIONAL = ("height", "label", "class_id", "torsion")


def _parse_allcurves_line(line):
    parts = line.split()
    if len(parts) < 5:
        raise DatasetError("expected 'N class number [a1,a2,a3,a4,a6] rank [torsion]'")
    N, cls, num, ainvs, rank = parts[:5]
    m = _AINVS.match(ainvs)
    if not m:
        raise DatasetError(f"bad a-invariants {ainvs!r}")
    torsion = int(parts[5]) if len(parts) > 5 else None
    class_id = f"{N}{cls}"
    curve = WeierstrassCurve.from_ainvs(m.groups(), label=f"{class_id}{num}")
    return CurveRecord(curve, int(N), int(rank), None, class_id, torsion)


def _csv_records(lines, mapping):
    reader = csv.DictReader(lines)
    fields = reader.fieldnames
    if fields is None:  # empty stream
        return
    col = {k: (mapping or {}).get(k, k) for k in CSV_REQUIRED + CSV_OPTIONAL}
    missing = [k for k in CSV_REQUIRED if col[k] not in fields]
    if missing:
        raise DatasetError(f"CSV missing mandatory columns: {', '.join(missing)}")
    for row in reader:
        yield reader.line_num, row, col


def _csv_row_to_record(row, col):
    def opt(k):
        v = row.get(col[k])
        return v.strip() if v not in (None, "") else None

    curve = WeierstrassCurve.from_ainvs([row[col[a]] for a in ("a1", "a2", "a3", "a4", "a6")],
                                        label=opt("label") or "")
    height, torsion = opt("height"), opt("torsion")
    return CurveRecord(curve, int(row[col["conductor"]]), int(row[col["rank"]]),
                       int(height) if height else None, opt("class_id"),
                       int(torsion) if torsion else None)


def _text_lines(stream):
    for line in stream:
        yield line.decode("utf-8") if isinstance(line, (bytes, bytearray)) else line


def parse_dataset(stream, fmt="allcurves", csv_mapping=None, isogeny_classes=False, strict=False):
    """Lazily yield :class:`CurveRecord` from a text or byte line source.

    ``fmt`` is ``"allcurves"`` (Cremona layout, ``#`` comments allowed) or
    ``"csv"`` (header row; ``csv_mapping`` maps field name -> column name).
    Malformed lines are logged with their line number and skipped, or raise
    :class:`DatasetError` when ``strict``.  With ``isogeny_classes`` only the
    first curve of each class is yielded.
    """
    if fmt not in ("allcurves", "csv"):
        raise DatasetError(f"unknown dataset format {fmt!r}")
    lines = _text_lines(stream)

    def bad(lineno, err):
        msg = f"line {lineno}: {err}"
        if strict:
            raise DatasetError(msg) from err
        log.warning("skipping malformed %s", msg)

    if fmt == "allcurves":
        def rows():
            for lineno, line in enumerate(lines, 1):
                line = line.strip()
                if line and not line.startswith("#"):
                    yield lineno, _parse_allcurves_line, line
    else:
        def rows():
            for lineno, row, col in _csv_records(lines, csv_mapping):
                yield lineno, lambda r, col=col: _csv_row_to_record(r, col), row

    seen_class = None
    for lineno, build, raw in rows():
        try:
            rec = build(raw)
        except (ValueError, KeyError, TypeError, AttributeError) as err:
            bad(lineno, err)
            continue
        if isogeny_classes and rec.class_id is not None:
            if rec.class_id == seen_class:
                continue
            seen_class = rec.class_id
        yield rec


def open_dataset(path):
    """Open a dataset file for reading as text, transparently decompressing ``.gz``."""
    if str(path).endswith(".gz"):
        return gzip.open(path, "rt", encoding="utf-8")
    return open(path, encoding="utf-8")


def format_allcurves(rec):
    """One Cremona allcurves line for a record parsed from that format."""
    c = rec.curve
    N = str(rec.conductor)
    cls = rec.class_id[len(N):] if rec.class_id else "a"
    num = c.label[len(rec.class_id):] if rec.class_id and c.label.startswith(rec.class_id) else "1"
    line = f"{N} {cls} {num} [{','.join(map(str, c.ainvs))}] {rec.rank}"
    if rec.torsion is not None:
        line += f" {rec.torsion}"
    return line

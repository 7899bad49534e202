#!/usr/bin/env python
"""Rebuild the curve fixtures shipped in ``src/apbias/data``.

Sources (both fetched from PyPI as plain wheels, nothing is installed):

* ``sagemath-data-elliptic-curves`` ships Cremona's ``cremona_mini.db``,
  which is complete for conductors below 10000.
* ``passagemath-database-stein-watkins-mini`` ships the first Stein-Watkins
  file ``a.000`` (conductors below 10^5, nearly but not fully complete).

The extract takes every Cremona class with N < 10000 and every
Stein-Watkins class with 10000 <= N <= 20000.  Stein-Watkins classes carry no
Cremona labels, so class letters in that range are assigned in file order
and do not match Cremona's labelling.

Usage::

    python scripts/build_fixtures.py [--cache DIR]
"""

import argparse
import bz2
import gzip
import io
import os
import re
import sqlite3
import sys
import tempfile
import urllib.request
import zipfile

FILES = "https://files.pythonhosted.org/packages"
CREMONA_WHEEL = (
    FILES + "/73/ff/6b9c555fe7a159fe30735562e52683ea1e1b9281b62169d8b19430a1697d/"
    "sagemath_data_elliptic_curves-0.8.2-py3-none-any.whl"
)
SW_WHEEL = (
    FILES + "/39/ba/b0270f0d09557a7479053a8e121f09218273845fb6e08f538712366aea18/"
    "passagemath_database_stein_watkins_mini-10.8.9rc0-py3-none-any.whl"
)
CREMONA_MEMBER = "sage_data_elliptic_curves/data/cremona/cremona_mini.db"
SW_MEMBER = "sage_wheels/share/stein_watkins/a.000.bz2"

NEWFORM_LEVELS = (11, 14, 15, 17, 19, 21, 37)
CREMONA_LIMIT = 10000
EXTRACT_LIMIT = 20000

DATA_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "src", "apbias", "data")


def fetch(url, cache):
    path = os.path.join(cache, url.rsplit("/", 1)[1])
    if not os.path.exists(path):
        print(f"fetching {url}", file=sys.stderr)
        urllib.request.urlretrieve(url, path)
    return path


def class_letters(i):
    """Cremona-style class code: 0 -> a, 25 -> z, 26 -> ba, ..."""
    s = ""
    while True:
        s = chr(ord("a") + i % 26) + s
        i //= 26
        if i == 0:
            return s


def cremona_rows(db_path, limit):
    con = sqlite3.connect(db_path)
    rows = con.execute(
        "SELECT c.conductor, c.class, c.rank, t.curve, t.eqn, t.tors "
        "FROM t_class c JOIN t_curve t ON t.class = c.class "
        "WHERE c.conductor < ?",
        (limit,),
    ).fetchall()
    con.close()
    out = []
    label_re = re.compile(r"^(\d+)([a-z]+)(\d+)$")
    for N, _cls, rank, label, eqn, tors in rows:
        m = label_re.match(label)
        out.append((N, m.group(2), int(m.group(3)), eqn.replace(" ", ""), rank, tors))
    # Cremona order: conductor, then class code (length first), then number
    out.sort(key=lambda r: (r[0], len(r[1]), r[1], r[2]))
    return out


def sw_rows(stream, lo, hi):
    out = []
    N = rank = None
    idx = -1
    prev_N = None
    num = 0
    for line in stream:
        line = line.strip()
        if not line:
            continue
        if line.startswith("["):
            if N is None or not lo <= N <= hi:
                continue
            parts = line.split()
            num += 1
            out.append((N, class_letters(idx), num, parts[0], rank, int(parts[-1].rstrip("x"))))
        else:
            parts = line.split()
            N = int(parts[0])
            if N > hi:
                break
            rank = int(parts[2])
            idx = idx + 1 if N == prev_N else 0
            prev_N = N
            num = 0
    return out


def write_allcurves(path, rows, header):
    if path.endswith(".gz"):
        raw = gzip.GzipFile(path, "wb", mtime=0)
    else:
        raw = open(path, "wb")
    with raw:
        with io.TextIOWrapper(raw, encoding="ascii", newline="\n") as fh:
            for h in header:
                fh.write(f"# {h}\n")
            for N, cls, num, ainvs, rank, tors in rows:
                fh.write(f"{N} {cls} {num} {ainvs} {rank} {tors}\n")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--cache", default=None, help="directory for downloaded wheels")
    args = ap.parse_args(argv)
    cache = args.cache or tempfile.mkdtemp(prefix="apbias-fixtures-")
    os.makedirs(cache, exist_ok=True)

    with zipfile.ZipFile(fetch(CREMONA_WHEEL, cache)) as zf:
        db_path = os.path.join(cache, "cremona_mini.db")
        with zf.open(CREMONA_MEMBER) as src, open(db_path, "wb") as dst:
            dst.write(src.read())
    cremona = cremona_rows(db_path, CREMONA_LIMIT)

    with zipfile.ZipFile(fetch(SW_WHEEL, cache)) as zf:
        with zf.open(SW_MEMBER) as raw:
            stream = io.TextIOWrapper(bz2.BZ2File(raw), encoding="ascii")
            sw = sw_rows(stream, CREMONA_LIMIT, EXTRACT_LIMIT)

    newform = [r for r in cremona if r[0] in NEWFORM_LEVELS]
    write_allcurves(
        os.path.join(DATA_DIR, "newform_levels.txt"),
        newform,
        ["Cremona allcurves rows for levels " + ",".join(map(str, NEWFORM_LEVELS)),
         "columns: N class number [a1,a2,a3,a4,a6] rank torsion"],
    )
    write_allcurves(
        os.path.join(DATA_DIR, "allcurves_20000.txt.gz"),
        cremona + sw,
        ["N < 10000: Cremona database (complete)",
         "10000 <= N <= 20000: Stein-Watkins a.000 (class letters assigned in file order)",
         "columns: N class number [a1,a2,a3,a4,a6] rank torsion"],
    )
    n_classes = len({(r[0], r[1]) for r in cremona + sw})
    print(f"wrote {len(cremona) + len(sw)} curves in {n_classes} classes", file=sys.stderr)


if __name__ == "__main__":
    main()

"""Command-line front end: ``apbias {trace,mf-bias,ec-bias,class-number,verify}``.

Settings come from defaults, then an optional TOML file (``--config``), then
flags.  ``--print-config`` shows the resolved settings as TOML and exits.
Exit status: 0 success, 1 verification failure, 2 usage error.
"""

import argparse
import dataclasses
import json
import os
import sys
import time
from dataclasses import dataclass, field
from math import isqrt

import tomli

from . import verify
from .arith import is_prime, mobius_omega_phi
from .bias import MODES, ec_bias_series, report_progress, weight_from_name, write_series
from .classno import hurwitz
from .curves import DatasetError, open_dataset, parse_dataset
from .data import FIXTURES, fixture_path
from .traces import TraceQuery, dim_new_signed, mf_bias_series, signed_traces_at_level

SUBCOMMANDS = ("trace", "mf-bias", "ec-bias", "class-number", "verify")
FIXTURE_PREFIX = "fixture:"


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    k: int = 2
    level: int | None = None
    hecke: int | None = None
    number: int | None = None
    primes: list = field(default_factory=list)
    weight: str = "unwt"
    delta: float | None = None
    X_max: int | None = None
    checkpoints: int = 200
    input: str | None = None
    format: str = "allcurves"
    mode: str = "by_rank"
    isogeny_classes: bool = False
    strict: bool = False
    out: str = "apbias_out"
    family: str | None = None
    workers: int = 0
    suite: str = "all"

    def weight_function(self):
        return weight_from_name(self.weight, self.delta)

    def resolved_workers(self):
        return self.workers or os.cpu_count() or 1

    def to_toml(self):
        lines = []
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            lines.append(f"{f.name} = {_toml_value(v)}")
        return "\n".join(lines) + "\n"


FIELD_NAMES = tuple(f.name for f in dataclasses.fields(RunConfig))


def _toml_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, float)):
        return repr(v)
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    raise TypeError(f"cannot write {v!r} as TOML")


def config_from_toml(text, subcommand=None):
    """Build a RunConfig from TOML text; ``subcommand`` overrides the file's."""
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as err:
        raise UsageError(f"config: {err}") from None
    unknown = sorted(set(data) - set(FIELD_NAMES))
    if unknown:
        raise UsageError(f"config: unknown keys {unknown}")
    file_sub = data.pop("subcommand", None)
    sub = subcommand or file_sub
    if sub is None:
        raise UsageError("config: no subcommand given")
    if file_sub is not None and subcommand is not None and file_sub != subcommand:
        raise UsageError(f"config is for {file_sub!r}, not {subcommand!r}")
    return RunConfig(subcommand=sub, **data)


# ---------------------------------------------------------------- parsing

def _int_list(text):
    try:
        return [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    S = argparse.SUPPRESS
    common.add_argument("--config", default=S, help="TOML file of settings (flags override it)")
    common.add_argument("--print-config", action="store_true", default=S,
                        help="print the resolved settings as TOML and exit")

    def opt(p, *names, **kw):
        p.add_argument(*names, default=S, **kw)

    parser = argparse.ArgumentParser(prog="apbias", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("trace", parents=[common], help="signed traces and dimensions")
    opt(p, "--k", type=int, help="weight (even, >= 2)")
    opt(p, "--level", type=int, help="squarefree level N")
    opt(p, "--hecke", type=int, help="Hecke index n, coprime to N")

    p = sub.add_parser("mf-bias", parents=[common], help="root-number averages over newforms")
    opt(p, "--k", type=int, help="weight (even, >= 2)")
    opt(p, "--primes", type=_int_list, help="comma-separated primes p")
    opt(p, "--weight", help="weight name (unwt, sqrt, x, x2, log, log2, loglog, power, log_power)")
    opt(p, "--delta", type=float, help="exponent for power/log weights")
    opt(p, "--X-max", dest="X_max", type=int, help="largest level")
    opt(p, "--checkpoints", type=int, help="number of checkpoints (default 200)")
    opt(p, "--out", help="output directory")
    opt(p, "--family", help="family name used in output filenames")

    p = sub.add_parser("ec-bias", parents=[common], help="rank or root-number averages over curves")
    opt(p, "--input", help=f"dataset path, or {FIXTURE_PREFIX}NAME for a bundled fixture")
    opt(p, "--format", choices=("allcurves", "csv"))
    opt(p, "--primes", type=_int_list, help="comma-separated primes p")
    opt(p, "--weight", help="weight name")
    opt(p, "--delta", type=float, help="exponent for power/log weights")
    opt(p, "--mode", choices=MODES)
    opt(p, "--X-max", dest="X_max", type=int, help="largest conductor (default: largest in input)")
    opt(p, "--checkpoints", type=int)
    opt(p, "--isogeny-classes", dest="isogeny_classes", action="store_true",
        help="keep only the first curve of each isogeny class")
    opt(p, "--strict", action="store_true", help="abort on malformed input lines")
    opt(p, "--out", help="output directory")
    opt(p, "--family", help="family name used in output filenames")
    opt(p, "--workers", type=int, help="worker processes (default: all cores)")

    p = sub.add_parser("class-number", parents=[common], help="Hurwitz class number H(n)")
    opt(p, "number", type=int, metavar="n")

    p = sub.add_parser("verify", parents=[common], help="run invariant suites")
    opt(p, "--suite", choices=("all",) + tuple(verify.SUITES))
    return parser


def resolve_config(argv):
    """Parse argv into (RunConfig, print_config flag)."""
    ns = vars(build_parser().parse_args(argv))
    sub = ns.pop("subcommand")
    printing = ns.pop("print_config", False)
    path = ns.pop("config", None)
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                cfg = config_from_toml(fh.read(), sub)
        except OSError as err:
            raise UsageError(f"cannot read config: {err}") from None
    else:
        cfg = RunConfig(subcommand=sub)
    cfg = dataclasses.replace(cfg, **ns)
    validate(cfg)
    return cfg, printing


def validate(cfg):
    """Reject bad settings before any computation."""
    if cfg.subcommand not in SUBCOMMANDS:
        raise UsageError(f"unknown subcommand {cfg.subcommand!r}")
    sc = cfg.subcommand
    if sc == "trace":
        if cfg.level is None or cfg.hecke is None:
            raise UsageError("trace needs --level and --hecke")
        try:
            TraceQuery(cfg.k, cfg.level, cfg.hecke)
        except ValueError as err:
            raise UsageError(str(err)) from None
        if cfg.level > 1 and _is_square(cfg.hecke):
            raise UsageError("trace: --hecke must be a nonsquare > 1 for level > 1")
    elif sc == "class-number":
        if cfg.number is None or cfg.number < 0:
            raise UsageError("class-number needs a nonnegative integer n")
    elif sc == "verify":
        if cfg.suite != "all" and cfg.suite not in verify.SUITES:
            raise UsageError(f"unknown suite {cfg.suite!r}")
    else:
        if not cfg.primes:
            raise UsageError(f"{sc} needs --primes")
        bad = [p for p in cfg.primes if not is_prime(p)]
        if bad:
            raise UsageError(f"not prime: {bad}")
        try:
            cfg.weight_function()
        except ValueError as err:
            raise UsageError(str(err)) from None
        if cfg.checkpoints < 1:
            raise UsageError("--checkpoints must be positive")
        if cfg.X_max is not None and cfg.X_max < 1:
            raise UsageError("--X-max must be positive")
        if not cfg.out:
            raise UsageError("--out must name a directory")
        if sc == "mf-bias":
            if cfg.k < 2 or cfg.k % 2:
                raise UsageError("--k must be even and >= 2")
            if cfg.X_max is None or cfg.X_max < 10:
                raise UsageError("mf-bias needs --X-max >= 10")
        else:
            if cfg.input is None:
                raise UsageError("ec-bias needs --input")
            if cfg.format not in ("allcurves", "csv"):
                raise UsageError(f"unknown format {cfg.format!r}")
            if cfg.mode not in MODES:
                raise UsageError(f"unknown mode {cfg.mode!r}")
            if cfg.workers < 0:
                raise UsageError("--workers must be >= 0")
            if not os.path.exists(input_path(cfg)):
                raise UsageError(f"input not found: {cfg.input}")


def _is_square(n):
    return isqrt(n) ** 2 == n


def input_path(cfg):
    if cfg.input.startswith(FIXTURE_PREFIX):
        name = cfg.input[len(FIXTURE_PREFIX):]
        if name not in FIXTURES:
            raise UsageError(f"unknown fixture {name!r}; choose from {sorted(FIXTURES)}")
        return fixture_path(name)
    return cfg.input


# ---------------------------------------------------------------- commands

def cmd_trace(cfg, out):
    st = signed_traces_at_level(cfg.k, cfg.level, cfg.hecke)
    dims = dim_new_signed(cfg.k, cfg.level)
    rows = [("tr+", st.tr_plus), ("tr-", st.tr_minus), ("tr_new", st.tr_new),
            ("tr_new_WN", st.tr_new_WN), ("dim+", dims.dim_plus), ("dim-", dims.dim_minus)]
    out(f"k={cfg.k} N={cfg.level} n={cfg.hecke}")
    for name, v in rows:
        out(f"{name:<10} {v:>12}")
    return 0, {"tr_plus": st.tr_plus, "tr_minus": st.tr_minus, "dims": [dims.dim_plus, dims.dim_minus]}


def cmd_class_number(cfg, out):
    h = hurwitz(cfg.number)
    out(f"H({cfg.number}) = {h}")
    return 0, {"n": cfg.number, "H": str(h)}


def cmd_verify(cfg, out):
    names = list(verify.SUITES) if cfg.suite == "all" else [cfg.suite]
    results = {name: verify.run_suite(name, out) for name in names}
    for name, ok in results.items():
        out(f"suite {name}: {'PASS' if ok else 'FAIL'}")
    return (0 if all(results.values()) else 1), {"suites": results}


def cmd_mf_bias(cfg, out):
    phi = cfg.weight_function()
    family = cfg.family or f"mf{cfg.k}"
    files = []
    for p in cfg.primes:
        plus, minus = mf_bias_series(cfg.k, p, cfg.X_max, phi, cfg.checkpoints)
        written = write_series(cfg.out, family, [s for s in (plus, minus) if s.checkpoints])
        files += written
        for s in (plus, minus):
            if s.checkpoints:
                X, v, n = s.final()
                out(f"p={p} {s.stratum.tag}: A({X}) = {v:.6g} over {n} forms")
    return 0, {"files": files}


def cmd_ec_bias(cfg, out):
    phi = cfg.weight_function()
    path = input_path(cfg)
    family = cfg.family or "ec"
    workers = cfg.resolved_workers()
    files = []
    for p in cfg.primes:
        with open_dataset(path) as fh:
            recs = parse_dataset(fh, fmt=cfg.format, isogeny_classes=cfg.isogeny_classes,
                                 strict=cfg.strict)
            series = ec_bias_series(recs, p, phi, mode=cfg.mode, X_max=cfg.X_max,
                                    checkpoints=cfg.checkpoints, workers=workers,
                                    progress=report_progress)
        files += write_series(cfg.out, family, series)
        for s in series:
            X, v, n = s.final()
            out(f"p={p} {s.stratum.tag}: A({X}) = {v:.6g} over {n} curves")
    return 0, {"files": files}


COMMANDS = {
    "trace": cmd_trace,
    "mf-bias": cmd_mf_bias,
    "ec-bias": cmd_ec_bias,
    "class-number": cmd_class_number,
    "verify": cmd_verify,
}


def dispatch(cfg, out=print):
    """Run a validated config; returns the exit status."""
    t0 = time.perf_counter()
    try:
        status, summary = COMMANDS[cfg.subcommand](cfg, out)
    except DatasetError as err:
        print(f"apbias: {err}", file=sys.stderr)
        status, summary = 2, {"error": str(err)}
    summary = {"subcommand": cfg.subcommand, "status": status,
               "seconds": round(time.perf_counter() - t0, 3), **summary}
    out(json.dumps(summary, sort_keys=True))
    return status


def main(argv=None):
    try:
        cfg, printing = resolve_config(argv)
    except UsageError as err:
        print(f"apbias: error: {err}", file=sys.stderr)
        return 2
    if printing:
        sys.stdout.write(cfg.to_toml())
        return 0
    return dispatch(cfg)


if __name__ == "__main__":
    sys.exit(main())

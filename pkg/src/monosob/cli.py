"""Command-line front end: constants, checks, sweeps, scans, fuzzing and the identity suite.

Exit status: 0 success, 1 configuration error, 2 numerical-accuracy failure,
3 inequality violation detected.

JSON output is JSON Lines.  The first line is a header holding the
timestamp and the resolved configuration; every later line is a body
record that depends only on the configuration and seed.  CSV output
puts the same header on a leading ``#`` line.
"""

from __future__ import annotations

import argparse
import configparser
import datetime as _dt
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field, fields
from typing import Sequence

from . import __version__
from . import checkers as chk
from . import explorer as ex
from .constants import constants_table
from .errors import DivergenceError, DomainError, QuadratureAccuracyError, UnsupportedDimensionError
from .funcspace import FAMILIES, build_function
from .quad import QuadratureSpec
from .special import Weight

EXIT_OK, EXIT_CONFIG, EXIT_ACCURACY, EXIT_VIOLATION = 0, 1, 2, 3

COMMANDS = ("constants", "check", "sweep", "asymptotics", "fuzz", "identities")
FORMATS = ("json", "csv")

DEFAULT_FAMILY = {
    "sobolev": "extremal",
    "whole_space": "extremal",
    "lp_logsob": "extremal",
    "logsob": "gaussian",
    "nash": "gaussian",
    "heisenberg": "gaussian",
    "l2_shannon": "gaussian",
    "shannon": "phi_alpha",
    "l1_logsob": "indicator",
    "trace": "gaussian",
    "refined": "bump",
    "tm_logsob": "bump",
}

CSV_COLUMNS = """\
CSV columns
  check        inequality, verdict, lhs, rhs, deficit, rel_margin, error, converged
  sweep        point (JSON of the grid point), deficit, error, rel_deficit, verdict
  asymptotics  l, term (l C_{2,ln,B}^2), error, rel_error
  fuzz         trial, verdict, lhs, rhs, deficit, rel_margin, error, converged, function (JSON)
  identities   case, identity, A, params, exact, quadrature, error, rel_error
  constants    name, value
"""


class ConfigError(ValueError):
    """Invalid configuration; maps to exit status 1."""


# ---------------------------------------------------------------- config


def _floats(text: str, name: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(t) for t in str(text).replace(" ", "").split(",") if t != "")
    except ValueError:
        raise ConfigError(f"{name}: expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise ConfigError(f"{name}: empty list")
    return vals


def parse_weight(text: str) -> tuple[float, ...]:
    A = _floats(text, "A")
    bad = [a for a in A if not (math.isfinite(a) and a >= 0)]
    if bad:
        raise ConfigError(f"A: exponents must be finite and nonnegative, got {text!r}")
    return A


def parse_grid(text: str, name: str) -> tuple[float, ...]:
    """``lo:hi:logN`` (geometric), ``lo:hi:N`` (linear) or a comma list."""
    text = str(text).strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"{name}: expected lo:hi:N or lo:hi:logN, got {text!r}")
        try:
            lo, hi = float(parts[0]), float(parts[1])
            geometric = parts[2].startswith("log")
            num = int(parts[2][3:] if geometric else parts[2])
        except ValueError:
            raise ConfigError(f"{name}: bad grid {text!r}") from None
        if num < 1 or not lo < hi or (geometric and lo <= 0):
            raise ConfigError(f"{name}: bad grid {text!r}")
        if num == 1:
            return (lo,)
        if geometric:
            return tuple(ex.log_grid(lo, hi, num))
        return tuple(lo + (hi - lo) * i / (num - 1) for i in range(num))
    return _floats(text, name)


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def parse_fparams(items: Sequence[str]) -> dict:
    out = {}
    for item in items:
        if "=" not in item:
            raise ConfigError(f"fparam: expected key=value, got {item!r}")
        key, val = item.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError(f"fparam: empty key in {item!r}")
        val = val.strip()
        if "," in val and not val.startswith("["):
            val = "[" + val + "]"
        out[key] = _parse_value(val)
    return out


@dataclass
class RunConfig:
    command: str = "check"
    A: tuple[float, ...] = (0.0, 0.0)
    ineq: str = "logsob"
    family: str | None = None
    fparams: dict = field(default_factory=dict)
    p: float | None = None
    alpha: float | None = None
    q: float | None = None
    C0: float | None = None
    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    sigma: tuple[float, ...] | None = None
    x0: tuple[tuple[float, ...], ...] | None = None
    a: tuple[float, ...] | None = None
    b: tuple[float, ...] | None = None
    lmax: int = 2**20
    trials: int = 100
    seed: int = 42
    cases: int = 100
    format: str = "json"
    out: str | None = None

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise ConfigError(f"command: unknown {self.command!r}")
        self.A = parse_weight(",".join(repr(float(a)) for a in self.A)) if self.A else parse_weight("")
        if self.command in ("check", "sweep", "fuzz") and self.ineq not in chk.CHECKERS \
                and self.ineq not in ex.FUZZ_SUITES:
            raise ConfigError(f"ineq: unknown {self.ineq!r}; choose from {sorted(chk.CHECKERS)}")
        if self.family is not None and self.family not in FAMILIES:
            raise ConfigError(f"family: unknown {self.family!r}; choose from {sorted(FAMILIES)}")
        if self.format not in FORMATS:
            raise ConfigError(f"format: expected one of {FORMATS}, got {self.format!r}")
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ConfigError("tol: tolerances must be positive")
        for name in ("trials", "cases", "lmax"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name}: must be a positive integer")
        for name in ("p", "q", "C0", "alpha"):
            v = getattr(self, name)
            if v is not None and not (math.isfinite(v) and v > 0):
                raise ConfigError(f"{name}: must be positive, got {v!r}")
        if self.x0 is not None:
            for pt in self.x0:
                if len(pt) != len(self.A):
                    raise ConfigError(f"x0: point {list(pt)} does not match n={len(self.A)}")
        return self

    @property
    def weight(self) -> Weight:
        return Weight(tuple(self.A))

    @property
    def spec(self) -> QuadratureSpec:
        return QuadratureSpec(rel_tol=self.rel_tol, abs_tol=self.abs_tol)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["A"] = list(self.A)
        for name in ("sigma", "a", "b"):
            if d[name] is not None:
                d[name] = list(d[name])
        if self.x0 is not None:
            d["x0"] = [list(pt) for pt in self.x0]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        d = dict(d)
        unknown = set(d) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        if "A" in d:
            d["A"] = tuple(float(a) for a in d["A"])
        for name in ("sigma", "a", "b"):
            if d.get(name) is not None:
                d[name] = tuple(float(v) for v in d[name])
        if d.get("x0") is not None:
            d["x0"] = tuple(tuple(float(v) for v in pt) for pt in d["x0"])
        return cls(**d).validate()

    # INI layout: [run] [function] [quadrature] [sweep] [output]
    _SECTIONS = {
        "run": ("command", "A", "ineq", "p", "alpha", "q", "C0", "trials", "seed", "cases"),
        "function": ("family",),
        "quadrature": ("rel_tol", "abs_tol"),
        "sweep": ("sigma", "x0", "a", "b", "lmax"),
        "output": ("format", "out"),
    }

    def to_ini(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        d = self.to_dict()
        for sec, keys in self._SECTIONS.items():
            cp[sec] = {}
            for key in keys:
                if d[key] is not None:
                    cp[sec][key] = _ini_value(key, d[key])
        for key, val in self.fparams.items():
            cp["function"][f"param.{key}"] = json.dumps(val)
        buf = []

        class _W:
            def write(self, s):
                buf.append(s)

        cp.write(_W())
        return "".join(buf)

    @classmethod
    def from_ini(cls, text: str, base: "RunConfig | None" = None) -> "RunConfig":
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"config file: {exc}") from None
        d = (base or cls()).to_dict()
        known = {k: s for s, ks in cls._SECTIONS.items() for k in ks}
        for sec in cp.sections():
            if sec not in cls._SECTIONS:
                raise ConfigError(f"config file: unknown section [{sec}]")
            for key, raw in cp[sec].items():
                if sec == "function" and key.startswith("param."):
                    d["fparams"][key[6:]] = _parse_value(raw)
                    continue
                if known.get(key) != sec:
                    raise ConfigError(f"config file: unknown key {key!r} in [{sec}]")
                d[key] = _from_ini_value(key, raw)
        return cls.from_dict(d)


_INTS = ("trials", "seed", "cases", "lmax")
_FLOATS = ("p", "alpha", "q", "C0", "rel_tol", "abs_tol")


def _ini_value(key, val) -> str:
    if key in ("A", "sigma", "a", "b"):
        return ",".join(repr(float(v)) for v in val)
    if key == "x0":
        return ";".join(",".join(repr(float(v)) for v in pt) for pt in val)
    if key in _FLOATS:
        return repr(float(val))
    return str(val)


def _from_ini_value(key, raw: str):
    raw = raw.strip()
    if raw == "" or raw.lower() == "none":
        return None
    if key == "A":
        return list(parse_weight(raw))
    if key in ("sigma", "a", "b"):
        return list(parse_grid(raw, key))
    if key == "x0":
        return [list(_floats(pt, "x0")) for pt in raw.split(";")]
    try:
        if key in _INTS:
            return int(raw)
        if key in _FLOATS:
            return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from None
    return raw


# ---------------------------------------------------------------- output


def _clean(obj):
    """JSON-safe copy: non-finite floats become strings, tuples become lists."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else repr(obj)
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        return _clean(obj.item())
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, allow_nan=False)


def fmt12(v) -> str:
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


class Sink:
    """Collects body records and writes header + body to a file or stdout."""

    def __init__(self, cfg: RunConfig, stream=None):
        self.cfg = cfg
        self.stream = stream
        self.rows: list[dict] = []
        self.csv_text: str | None = None

    def header(self) -> dict:
        stamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
        return {"header": {"tool": "monosob", "version": __version__, "timestamp": stamp,
                           "config": self.cfg.to_dict()}}

    def body(self) -> str:
        if self.cfg.format == "csv":
            return self.csv_text if self.csv_text is not None else _rows_to_csv(self.rows)
        return "".join(dumps(r) + "\n" for r in self.rows)

    def flush(self):
        head = dumps(self.header())
        text = ("# " + head + "\n" if self.cfg.format == "csv" else head + "\n") + self.body()
        if self.cfg.out:
            with open(self.cfg.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            (self.stream or sys.stdout).write(text)


def _rows_to_csv(rows: list[dict]) -> str:
    import csv
    import io

    if not rows:
        return ""
    buf = io.StringIO()
    cols = list(rows[0])
    writer = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: (dumps(v) if isinstance(v, (list, dict)) else repr(v) if isinstance(v, float) else v)
                         for k, v in r.items()})
    return buf.getvalue()


def _report_row(r: chk.InequalityReport, **extra) -> dict:
    return {**extra, **r.to_dict()}


def _report_csv_row(r: chk.InequalityReport, **extra) -> dict:
    return {**extra, "inequality": r.inequality, "verdict": r.verdict, "lhs": r.lhs, "rhs": r.rhs,
            "deficit": r.deficit, "rel_margin": r.rel_margin, "error": r.error, "converged": r.converged}


# ---------------------------------------------------------------- commands


def _checker_params(cfg: RunConfig) -> dict:
    kw = {}
    for name in ("p", "alpha", "q", "C0"):
        v = getattr(cfg, name)
        if v is not None:
            kw[name] = v
    return kw


def _default_fparams(cfg: RunConfig, family: str) -> dict:
    fp = dict(cfg.fparams)
    if family == "extremal" and "p" not in fp:
        fp["p"] = cfg.p if cfg.p is not None else 2.0
    if family == "phi_alpha" and "alpha" not in fp:
        fp["alpha"] = cfg.alpha if cfg.alpha is not None else 2.0
    if family in ("bump", "indicator", "smoothed_indicator") and cfg.ineq in ("refined", "tm_logsob"):
        fp.setdefault("R", 1.0)
    return fp


def make_function(cfg: RunConfig):
    family = cfg.family or DEFAULT_FAMILY.get(cfg.ineq, "gaussian")
    if cfg.family is None and family == "extremal" and cfg.p == 1.0:
        family = "gaussian"  # no extremal exists at p = 1
    w = cfg.weight.extend(0.0) if cfg.ineq == "trace" else cfg.weight
    return build_function(family, w, **_default_fparams(cfg, family))


def cmd_constants(cfg: RunConfig, stream=None) -> int:
    q = cfg.q
    table = constants_table(cfg.weight, p=cfg.p, alpha=cfg.alpha, q=q, C0=cfg.C0 if cfg.C0 is not None else 1.0)
    rows = [{"name": k, "value": v} for k, v in table.rows()]
    if cfg.format == "csv" or cfg.out:
        sink = Sink(cfg, stream)
        sink.rows = rows if cfg.format == "csv" else [{"constants": {r["name"]: r["value"] for r in rows},
                                                       "weight": list(cfg.A)}]
        sink.flush()
        return EXIT_OK
    out = stream or sys.stdout
    width = max(len(r["name"]) for r in rows)
    out.write(f"# A = {list(cfg.A)}\n")
    for r in rows:
        out.write(f"{r['name']:<{width}}  {fmt12(r['value'])}\n")
    return EXIT_OK


def cmd_check(cfg: RunConfig, stream=None) -> int:
    sink = Sink(cfg, stream)
    f = make_function(cfg)
    try:
        rep = chk.run_check(cfg.ineq, f, cfg.weight, cfg.spec, **_checker_params(cfg))
    except QuadratureAccuracyError as exc:
        sink.rows = [{"inequality": cfg.ineq, "function": f.describe(), "accuracy_failure": str(exc),
                      "partial_value": exc.value, "partial_error": exc.error}]
        sink.flush()
        return EXIT_ACCURACY
    sink.rows = [_report_csv_row(rep) if cfg.format == "csv" else _report_row(rep)]
    sink.flush()
    return EXIT_VIOLATION if rep.verdict == "violated-beyond-error" else EXIT_OK


def cmd_sweep(cfg: RunConfig, stream=None) -> int:
    family = cfg.family or DEFAULT_FAMILY.get(cfg.ineq, "gaussian")
    if family == "gaussian":
        sigmas = cfg.sigma or tuple(ex.log_grid(0.25, 4.0, 9))
        offsets = cfg.x0 or (None,)
        points = [{"sigma": s, **({"x0": list(x)} if x is not None else {})} for x in offsets for s in sigmas]
    elif family == "extremal":
        points = [{"a": a, "b": b} for a in (cfg.a or (0.5, 1.0, 2.0)) for b in (cfg.b or (0.5, 1.0, 2.0))]
    else:
        raise ConfigError(f"family: sweeps cover 'gaussian' and 'extremal', not {family!r}")
    try:
        res = ex.deficit_profile(cfg.ineq, family, points, cfg.weight, cfg.spec, **_checker_params(cfg))
    except QuadratureAccuracyError as exc:
        sink = Sink(cfg, stream)
        sink.rows = [{"accuracy_failure": str(exc)}]
        sink.flush()
        return EXIT_ACCURACY
    _emit_sweep(cfg, res, stream)
    return EXIT_VIOLATION if "violated-beyond-error" in res.columns["verdict"] else EXIT_OK


def _emit_sweep(cfg, res: ex.SweepResult, stream):
    sink = Sink(cfg, stream)
    if cfg.format == "csv":
        sink.csv_text = res.to_csv()
    else:
        sink.rows = [json.loads(dumps(res.to_dict()))]
    sink.flush()


def cmd_asymptotics(cfg: RunConfig, stream=None) -> int:
    top = max(2, int(math.floor(math.log2(cfg.lmax) + 1e-12)))
    grid = [2**j for j in range(2, top + 1)]
    if grid[-1] != cfg.lmax:
        grid.append(int(cfg.lmax))
    res = ex.asymptotic_scan(cfg.weight, grid)
    _emit_sweep(cfg, res, stream)
    return EXIT_OK


def cmd_fuzz(cfg: RunConfig, stream=None) -> int:
    params = _checker_params(cfg)
    if cfg.ineq in ("refined", "tm_logsob"):
        params.setdefault("C0", 10.0)
    res = ex.fuzz(cfg.ineq, cfg.weight, trials=cfg.trials, seed=cfg.seed,
                  spec=QuadratureSpec(rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol, raise_on_failure=False), **params)
    sink = Sink(cfg, stream)
    if cfg.format == "csv":
        sink.rows = [{**_report_csv_row(r, trial=i), "function": r.function} for i, r in enumerate(res.reports)]
    else:
        sink.rows = [{"summary": res.summary()}] + [_report_row(r, trial=i) for i, r in enumerate(res.reports)]
    sink.flush()
    return EXIT_VIOLATION if res.violations else EXIT_OK


IDENTITY_TOL = 1e-8


def cmd_identities(cfg: RunConfig, stream=None) -> int:
    rows = ex.identity_suite(cfg.cases, cfg.seed, cfg.spec)
    for r in rows:
        r["pass"] = r["rel_error"] <= IDENTITY_TOL
    sink = Sink(cfg, stream)
    sink.rows = rows
    sink.flush()
    return EXIT_OK if all(r["pass"] for r in rows) else EXIT_ACCURACY


HANDLERS = {
    "constants": cmd_constants,
    "check": cmd_check,
    "sweep": cmd_sweep,
    "asymptotics": cmd_asymptotics,
    "fuzz": cmd_fuzz,
    "identities": cmd_identities,
}


# ---------------------------------------------------------------- argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("run options")
    g.add_argument("--config", help="INI file; flags given on the command line override it")
    g.add_argument("--A", help="weight exponents, comma separated, e.g. 1,2")
    g.add_argument("--p", type=float)
    g.add_argument("--alpha", type=float)
    g.add_argument("--q", type=float)
    g.add_argument("--C0", type=float, help="Trudinger-Moser constant for refined/tm_logsob")
    g.add_argument("--ineq", help=f"one of {', '.join(chk.CHECKERS)} (fuzz also takes suite names)")
    g.add_argument("--family", help=f"one of {', '.join(FAMILIES)}")
    g.add_argument("--fparam", action="append", default=None, metavar="KEY=VALUE",
                   help="function parameter; repeatable, lists as a,b,c")
    g.add_argument("--sigma", help="sigma grid: lo:hi:logN, lo:hi:N or a comma list")
    g.add_argument("--x0", action="append", default=None, help="translate for sweeps; repeatable")
    g.add_argument("--a", dest="grid_a", help="extremal a grid")
    g.add_argument("--b", dest="grid_b", help="extremal b grid")
    g.add_argument("--lmax", type=int)
    g.add_argument("--trials", type=int)
    g.add_argument("--cases", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--tol", type=float, help="relative quadrature tolerance (env MONOSOB_TOL sets the default)")
    g.add_argument("--abs-tol", type=float)
    g.add_argument("--out", help="output path; stdout when omitted")
    g.add_argument("--format", choices=FORMATS)
    parser = argparse.ArgumentParser(
        prog="monosob",
        description="Sharp constants and inequality checks for monomial weights.",
        epilog=CSV_COLUMNS + "\nExit status: 0 ok, 1 config error, 2 accuracy failure, 3 violation.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"monosob {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "constants": "print every constant applicable to A (and p, alpha, q)",
        "check": "run one checker on one function",
        "sweep": "deficit profile over a Gaussian or extremal parameter grid",
        "asymptotics": "scan l C_{2,ln,B}^2 against its limit over l = 2^j",
        "fuzz": "run a checker on seeded random functions",
        "identities": "quadrature against closed-form integrals on random cases",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name], epilog=CSV_COLUMNS,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    return parser


def config_from_args(ns: argparse.Namespace, env=None) -> RunConfig:
    env = os.environ if env is None else env
    base = RunConfig(command=ns.command)
    if env.get("MONOSOB_TOL"):
        try:
            base.rel_tol = float(env["MONOSOB_TOL"])
        except ValueError:
            raise ConfigError(f"MONOSOB_TOL: expected a number, got {env['MONOSOB_TOL']!r}") from None
    if ns.config:
        try:
            with open(ns.config, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"config: cannot read {ns.config!r}: {exc.strerror}") from None
        base = RunConfig.from_ini(text, base)
        base.command = ns.command
    d = base.to_dict()
    if ns.A is not None:
        d["A"] = list(parse_weight(ns.A))
    for name in ("p", "alpha", "q", "C0", "ineq", "family", "lmax", "trials", "cases", "seed", "out", "format"):
        v = getattr(ns, name)
        if v is not None:
            d[name] = v
    if ns.tol is not None:
        d["rel_tol"] = ns.tol
    if ns.abs_tol is not None:
        d["abs_tol"] = ns.abs_tol
    if ns.fparam:
        d["fparams"] = {**d["fparams"], **parse_fparams(ns.fparam)}
    if ns.sigma is not None:
        d["sigma"] = list(parse_grid(ns.sigma, "sigma"))
    if ns.x0:
        d["x0"] = [list(_floats(x, "x0")) for x in ns.x0]
    if ns.grid_a is not None:
        d["a"] = list(parse_grid(ns.grid_a, "a"))
    if ns.grid_b is not None:
        d["b"] = list(parse_grid(ns.grid_b, "b"))
    return RunConfig.from_dict(d)


def main(argv: Sequence[str] | None = None, stream=None, env=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        cfg = config_from_args(ns, env)
        return HANDLERS[cfg.command](cfg, stream)
    except (ConfigError, DomainError, DivergenceError, UnsupportedDimensionError) as exc:
        print(f"monosob: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except QuadratureAccuracyError as exc:
        print(f"monosob: accuracy failure: {exc}", file=sys.stderr)
        return EXIT_ACCURACY


if __name__ == "__main__":
    sys.exit(main())

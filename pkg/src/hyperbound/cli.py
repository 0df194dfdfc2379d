"""Command-line front end.

Configuration is flat ``key = value`` text with dotted keys, for example::

    # Scarf-type well
    g.2 = 1.0
    a = 0.0
    kappa.max = 3
    eps = 0.05, 0.025, 0.0125

Flags override file values; ``--set KEY=VALUE`` overrides anything.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import re
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from ._errors import HyperboundError, NoRoots
from .matching import (
    DEFAULT_EPSILONS,
    MatchConfig,
    assemble_wavefunction,
    default_kappa_max,
    find_spectrum,
)
from .oracle import numerov_spectrum
from .potential import PotentialSpec
from .qbuilder import SEEDS, build_q
from .basis import BasisParams
from .series import detect_termination

__all__ = ["ConfigError", "RunConfig", "load_config", "parse_config_text", "run", "main"]

EXIT_OK, EXIT_MISMATCH, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2, 3
FORMATS = ("table", "json", "csv")
COMMANDS = ("spectrum", "wavefunction", "validate", "qmatrix", "terminate-scan")

_COUPLING = re.compile(r"^([fg])\.(\d+)$")
_KNOWN = {
    "M", "a", "kappa.min", "kappa.max", "grid", "eps", "tol.series", "tol.root",
    "output.format", "output.path", "threads", "validate.bound", "level", "x",
    "blocks", "p", "kappa", "K", "scan.a", "scan.kappa",
}


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


def _fmt(v: float) -> str:
    return format(v, ".17g")


# -- configuration ------------------------------------------------------------
def parse_config_text(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        out[key] = value
    return out


def _float(raw: dict, key: str, default=None) -> float | None:
    if key not in raw:
        return default
    try:
        return float(raw[key])
    except ValueError:
        raise ConfigError(f"{key}: not a number: {raw[key]!r}") from None


def _int(raw: dict, key: str, default=None) -> int | None:
    v = _float(raw, key, None)
    if v is None:
        return default
    if v != int(v):
        raise ConfigError(f"{key}: expected an integer, got {raw[key]!r}")
    return int(v)


def _floats(raw: dict, key: str, default=None) -> tuple | None:
    if key not in raw:
        return default
    try:
        return tuple(float(s) for s in raw[key].replace(",", " ").split())
    except ValueError:
        raise ConfigError(f"{key}: expected a list of numbers") from None


def _span(raw: dict, key: str, default):
    """``start:stop:count`` or a plain list."""
    if key not in raw:
        return default
    text = raw[key]
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"{key}: expected start:stop:count")
        try:
            lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise ConfigError(f"{key}: expected start:stop:count") from None
        return np.linspace(lo, hi, n)
    return np.asarray(_floats(raw, key))


@dataclass
class RunConfig:
    spec: PotentialSpec
    a: float = 0.0
    kappa_range: tuple | None = None
    epsilons: tuple = DEFAULT_EPSILONS
    tolerances: dict = field(default_factory=lambda: {"series": 1e-13, "root": 1e-10})
    output: dict = field(default_factory=lambda: {"format": "table", "path": None})
    grid_points: int = 64
    threads: int | None = None
    raw: dict = field(default_factory=dict)

    def __post_init__(self):
        if any(not t > 0 for t in self.tolerances.values()):
            raise ConfigError("all tolerances must be positive")
        eps = self.epsilons
        if not eps or any(not 0 < e <= 0.5 for e in eps):
            raise ConfigError("every epsilon must lie in (0, 0.5]")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ConfigError("epsilons must be strictly decreasing")
        if self.output["format"] not in FORMATS:
            raise ConfigError(f"output.format must be one of {FORMATS}")
        if self.grid_points < 32:
            raise ConfigError("grid must be at least 32")
        if self.kappa_range is not None:
            lo, hi = self.kappa_range
            if not 0 < lo < hi:
                raise ConfigError(f"invalid kappa range ({lo}, {hi})")

    @classmethod
    def from_mapping(cls, raw: dict[str, str]) -> "RunConfig":
        f, g = {}, {}
        for key in raw:
            m = _COUPLING.match(key)
            if m:
                (f if m.group(1) == "f" else g)[int(m.group(2))] = _float(raw, key)
            elif key not in _KNOWN:
                raise ConfigError(f"unknown key {key!r}")
        try:
            spec = PotentialSpec.from_couplings(f=f, g=g, M=_int(raw, "M"))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        kmin = _float(raw, "kappa.min", 1e-3)
        kmax = _float(raw, "kappa.max", None)
        return cls(
            spec=spec,
            a=_float(raw, "a", 0.0),
            kappa_range=(kmin, kmax if kmax is not None else default_kappa_max(spec)),
            epsilons=_floats(raw, "eps", DEFAULT_EPSILONS),
            tolerances={
                "series": _float(raw, "tol.series", 1e-13),
                "root": _float(raw, "tol.root", 1e-10),
            },
            output={"format": raw.get("output.format", "table"), "path": raw.get("output.path")},
            grid_points=_int(raw, "grid", 64),
            threads=_int(raw, "threads", None),
            raw=dict(raw),
        )

    def match_config(self) -> MatchConfig:
        return MatchConfig(
            epsilons=self.epsilons,
            grid_points=self.grid_points,
            tol=self.tolerances["root"],
            series_tol=self.tolerances["series"],
            threads=self.threads,
        )

    def echo(self) -> dict:
        """Config summary written into JSON output."""
        out = {k: v for k, v in self.spec.as_dict().items() if k == "M" or v}
        out.update(
            {
                "a": self.a,
                "kappa.min": self.kappa_range[0],
                "kappa.max": self.kappa_range[1],
                "eps": list(self.epsilons),
                "grid": self.grid_points,
                "tol.series": self.tolerances["series"],
                "tol.root": self.tolerances["root"],
            }
        )
        return out


def load_config(args: argparse.Namespace) -> RunConfig:
    raw: dict[str, str] = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                raw.update(parse_config_text(fh.read()))
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
    flag_map = {
        "kappa_min": "kappa.min",
        "kappa_max": "kappa.max",
        "grid": "grid",
        "eps": "eps",
        "tol": "tol.root",
        "format": "output.format",
        "out": "output.path",
    }
    for attr, key in flag_map.items():
        val = getattr(args, attr, None)
        if val is not None:
            raw[key] = str(val)
    for kind in ("f", "g"):
        for item in getattr(args, kind) or []:
            if "=" not in item:
                raise ConfigError(f"--{kind} expects POWER=VALUE, got {item!r}")
            power, value = item.split("=", 1)
            raw[f"{kind}.{power.strip()}"] = value.strip()
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        raw[key.strip()] = value.strip()
    return RunConfig.from_mapping(raw)


# -- output helpers -------------------------------------------------------------
def _table(headers, rows) -> str:
    cells = [headers] + [[c if isinstance(c, str) else _fmt(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(headers))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def _csv(headers, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(headers)
    for r in rows:
        w.writerow([c if isinstance(c, str) else _fmt(c) for c in r])
    return buf.getvalue()


def dump_json(obj) -> str:
    """Deterministic JSON; loading and re-dumping reproduces it byte for byte."""
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _emit(cfg: RunConfig, headers, rows, payload) -> str:
    fmt = cfg.output["format"]
    if fmt == "json":
        return dump_json(payload)
    if fmt == "csv":
        return _csv(headers, rows)
    return _table(headers, rows)


# -- commands -------------------------------------------------------------------
def _spectrum(cfg: RunConfig):
    try:
        results = find_spectrum(cfg.spec, cfg.a, cfg.kappa_range, cfg.match_config())
    except NoRoots:
        results = []
    rows = [[r.kappa, r.energy, r.mixing_M, r.mixing_N, r.residual] for r in results]
    payload = {"config": cfg.echo(), "results": [r.as_dict() for r in results]}
    return EXIT_OK, _emit(cfg, ["kappa", "energy", "mixing_M", "mixing_N", "residual"], rows, payload)


def _wavefunction(cfg: RunConfig):
    level = _int(cfg.raw, "level", 0)
    xs = _span(cfg.raw, "x", np.linspace(-5.0, 5.0, 101))
    results = find_spectrum(cfg.spec, cfg.a, cfg.kappa_range, cfg.match_config())
    if not 0 <= level < len(results):
        raise NoRoots(f"level {level} not found ({len(results)} levels)")
    samples = assemble_wavefunction(results[level], cfg.spec, cfg.a, xs, cfg.match_config())
    rows = [list(s) for s in samples]
    payload = {
        "config": cfg.echo(),
        "level": results[level].as_dict(),
        "samples": [{"x": x, "psi": v, "dpsi": d} for x, v, d in samples],
    }
    fmt = cfg.output["format"]
    if fmt == "json":
        return EXIT_OK, dump_json(payload)
    return EXIT_OK, _csv(["x", "psi", "dpsi"], rows)


def _validate(cfg: RunConfig):
    bound = _float(cfg.raw, "validate.bound", 1e-5)
    series = [r.energy for r in find_spectrum(cfg.spec, cfg.a, cfg.kappa_range, cfg.match_config())]
    oracle = numerov_spectrum(cfg.spec)
    series = sorted(series)
    n = max(len(series), len(oracle))
    rows, ok = [], len(series) == len(oracle)
    for i in range(n):
        es = series[i] if i < len(series) else float("nan")
        eo = oracle[i] if i < len(oracle) else float("nan")
        diff = abs(es - eo)
        ok = ok and diff < bound
        rows.append([i, es, eo, diff])
    payload = {
        "config": cfg.echo(),
        "bound": bound,
        "passed": bool(ok),
        "levels": [{"level": r[0], "series": r[1], "oracle": r[2], "abs_diff": r[3]} for r in rows],
    }
    text = _emit(cfg, ["level", "series", "oracle", "abs_diff"], rows, payload)
    if cfg.output["format"] == "table":
        text += f"{'PASS' if ok else 'FAIL'} (bound {bound:g}, {len(series)} vs {len(oracle)} levels)\n"
    return (EXIT_OK if ok else EXIT_MISMATCH), text


def _qmatrix(cfg: RunConfig):
    blocks = _int(cfg.raw, "blocks", 4)
    p = _int(cfg.raw, "p", 0)
    if p not in (0, 1):
        raise ConfigError("p must be 0 or 1")
    kappa = _float(cfg.raw, "kappa", 1.0)
    qm = build_q(cfg.spec, BasisParams(cfg.a, kappa), SEEDS[p])
    rows = []
    entries = []
    for n in range(blocks):
        kets = qm.block_kets(n)
        A = qm.block_A(n)
        B = qm.block_B(n - 1) if n > 0 else np.zeros((qm.D, qm.D))
        for i, ket in enumerate(kets):
            label = "-" if ket is None else f"({ket.n},{ket.p},{ket.q})"
            row = list(B[i]) + list(A[i])
            rows.append([str(n), label] + row)
            entries.append({"block": n, "ket": label, "B": list(B[i]), "A": list(A[i])})
    headers = ["block", "ket"] + [f"B{j}" for j in range(qm.D)] + [f"A{j}" for j in range(qm.D)]
    payload = {
        "config": cfg.echo(),
        "p": p,
        "kappa": kappa,
        "D": qm.D,
        "d0": qm.d0,
        "rows": entries,
    }
    head = f"# Q(kappa={_fmt(kappa)}, a={_fmt(cfg.a)}, p={p}): D={qm.D}, d0={qm.d0}\n"
    text = _emit(cfg, headers, rows, payload)
    return EXIT_OK, (head + text if cfg.output["format"] == "table" else text)


def _terminate_scan(cfg: RunConfig):
    p = _int(cfg.raw, "p", 0)
    K = _int(cfg.raw, "K", 0)
    a_values = _span(cfg.raw, "scan.a", np.array([cfg.a]))
    kappa_values = _span(cfg.raw, "scan.kappa", np.linspace(*cfg.kappa_range, cfg.grid_points))
    points = detect_termination(cfg.spec, p, a_values, kappa_values, K)
    rows = [[pt.a, pt.kappa, pt.K, pt.residual] for pt in points]
    payload = {
        "config": cfg.echo(),
        "points": [{"a": pt.a, "kappa": pt.kappa, "K": pt.K, "residual": pt.residual} for pt in points],
    }
    return EXIT_OK, _emit(cfg, ["a", "kappa", "K", "residual"], rows, payload)


_HANDLERS = {
    "spectrum": _spectrum,
    "wavefunction": _wavefunction,
    "validate": _validate,
    "qmatrix": _qmatrix,
    "terminate-scan": _terminate_scan,
}


def run(command: str, cfg: RunConfig) -> tuple[int, str]:
    """Execute ``command``; returns ``(exit status, text output)``."""
    if command not in _HANDLERS:
        raise ConfigError(f"unknown command {command!r}")
    return _HANDLERS[command](cfg)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hyperbound",
        description="Bound states of hyperbolic short-range potentials by partitioned power series.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", metavar="PATH")
        p.add_argument("--kappa-min", type=float)
        p.add_argument("--kappa-max", type=float)
        p.add_argument("--grid", type=int, help="kappa scan points")
        p.add_argument("--eps", help="comma-separated epsilon ladder")
        p.add_argument("--tol", type=float, help="root tolerance in kappa")
        p.add_argument("--format", choices=FORMATS)
        p.add_argument("--out", metavar="PATH")
        p.add_argument("-f", action="append", metavar="M=VALUE", help="symmetric coupling f_M")
        p.add_argument("-g", action="append", metavar="N=VALUE", help="anti-symmetric coupling g_N")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override any config key")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = load_config(args)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        status, text = run(args.command, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (HyperboundError, ValueError, ArithmeticError) as exc:
        print(f"solver error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    path = cfg.output.get("path")
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

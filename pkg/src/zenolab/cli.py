"""Command-line front end.

Every subcommand writes a table (CSV) or an object (JSON) to ``--output`` or
standard output; diagnostics go to standard error.  Options may also come from
a flat ``key = value`` file given by ``--config`` or ``$ZENOLAB_CONFIG``, with
keys spelled like the long flags; explicit flags win.

Exit codes: 0 success, 2 bad arguments, 3 numerical non-convergence, 4 I/O failure.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DomainError
from .model import PhysicalConstants, custom_params, hydrogen_params, zeno_time
from .oracle import bromwich_inverse, diagonalize, DiscretizedModel, spectral_inverse
from .resolvent import find_pole, perturbative_pole, spectral_density
from .selfenergy import Sheet, qbar, qbar_derivative, qbar_quadrature
from .survival import (
    CutQuadratureSpec,
    crossover_time,
    tail_constant,
    time_grid,
    timeseries,
    y_cut_term,
    y_pole_term,
)

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

SAMPLE_COLUMNS = ("t_s", "tau", "p", "p_exponential", "p_powerlaw", "p_interference",
                  "y_re", "y_im", "h", "eta")

CONFIG_ENV = "ZENOLAB_CONFIG"


class UsageError(ValueError):
    """Inconsistent or malformed options."""


@dataclass(frozen=True)
class RunConfig:
    """Resolved options shared by all subcommands.

    ``z = 0`` selects synthetic mode, which needs ``chi`` and ``a`` overrides
    (``cutoff_lambda`` defaults to 1 rad/s there).  Hydrogen-like mode derives
    ``chi`` and ``a`` from ``z`` and ``alpha`` and rejects overrides of either.
    """

    z: int = 1
    overrides: dict = field(default_factory=dict)
    quad_tol: float = 1e-11
    pole_tol: float = 1e-14
    output_path: str = "-"
    output_format: str = "csv"

    def __post_init__(self):
        unknown = set(self.overrides) - {"alpha", "chi", "a", "cutoff_lambda"}
        if unknown:
            raise UsageError(f"unknown overrides {sorted(unknown)}")
        if self.z < 0:
            raise UsageError("--z must be >= 0")
        if self.z == 0:
            missing = {"chi", "a"} - set(self.overrides)
            if missing:
                raise UsageError(f"synthetic mode (--z 0) needs {' and '.join(sorted(missing))}")
            if "alpha" in self.overrides:
                raise UsageError("--alpha has no effect in synthetic mode")
        else:
            clash = {"chi", "a"} & set(self.overrides)
            if clash:
                raise UsageError(f"hydrogen-like mode derives {', '.join(sorted(clash))}; drop the override")
        if self.output_format not in ("csv", "json"):
            raise UsageError(f"unknown format {self.output_format!r}")
        if not (self.quad_tol > 0 and self.pole_tol > 0):
            raise UsageError("tolerances must be positive")

    def params(self):
        o = self.overrides
        if self.z == 0:
            return custom_params(o.get("cutoff_lambda", 1.0), o["chi"], o["a"])
        consts = PhysicalConstants(alpha=o["alpha"]) if "alpha" in o else PhysicalConstants()
        p = hydrogen_params(consts, self.z)
        if "cutoff_lambda" in o:
            p = dataclasses.replace(p, cutoff_lambda=o["cutoff_lambda"])
        return p

    def cut_spec(self, method="adaptive_truncated", nodes=128):
        return CutQuadratureSpec(method=method, tolerance=self.quad_tol, max_nodes=nodes)


# ----------------------------------------------------------------------------- formatting

def fmt_float(x) -> str:
    x = float(x)
    if not math.isfinite(x):
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return format(x, ".17g")


def _json_value(v) -> str:
    if isinstance(v, bool) or v is None:
        return json.dumps(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt_float(v) if math.isfinite(v) else "null"
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json_value(x)}" for k, x in v.items()) + "}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_json_value(x) for x in v) + "]"
    raise TypeError(f"cannot serialize {type(v).__name__}")


def dumps_json(obj) -> str:
    """JSON text with every float written to 17 significant digits."""
    return _json_value(obj) + "\n"


def _csv_cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return fmt_float(v)
    return str(v)


def table_text(rows: list[dict], columns=None) -> str:
    if not rows:
        raise ValueError("nothing to write")
    columns = list(columns or rows[0].keys())
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_csv_cell(row[c]) for c in columns])
    return buf.getvalue()


def sample_row(s) -> dict:
    return {
        "t_s": s.t, "tau": s.tau, "p": s.p, "p_exponential": s.p_exponential,
        "p_powerlaw": s.p_powerlaw, "p_interference": s.p_interference,
        "y_re": s.y.real, "y_im": s.y.imag, "h": s.h, "eta": s.eta,
    }


def _write(text: str, destination) -> None:
    if destination in (None, "-"):
        sys.stdout.write(text)
    elif hasattr(destination, "write"):
        destination.write(text)
    else:
        with open(destination, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def emit(samples, fmt: str = "csv", destination="-", params=None) -> None:
    """Write survival samples as CSV (fixed columns) or JSON ``{"params", "samples"}``."""
    rows = [sample_row(s) for s in samples]
    if not rows:
        raise ValueError("emit needs at least one sample")
    if fmt == "csv":
        text = table_text(rows, SAMPLE_COLUMNS)
    elif fmt == "json":
        text = dumps_json({"params": params.as_dict() if params is not None else {}, "samples": rows})
    else:
        raise ValueError(f"unknown format {fmt!r}")
    _write(text, destination)


def _emit_rows(rows, cfg: RunConfig, params, key="rows", extra=None):
    if cfg.output_format == "csv":
        text = table_text(rows)
    else:
        obj = {"params": params.as_dict()}
        obj.update(extra or {})
        obj[key] = rows
        text = dumps_json(obj)
    _write(text, cfg.output_path)


# ----------------------------------------------------------------------------- options

# dest -> (converter, default); filled in by _opt
_OPTIONS: dict[str, tuple] = {}


def _opt(parser, flag, conv, default, help, **kw):
    dest = flag.lstrip("-").replace("-", "_")
    _OPTIONS[dest] = (conv, default)
    parser.add_argument(flag, dest=dest, type=conv, default=None,
                        help=f"{help} (default: {default})", **kw)


def _common(parser):
    g = parser.add_argument_group("model and output")
    _opt(g, "--z", int, 1, "nuclear charge; 0 selects synthetic parameters")
    _opt(g, "--alpha", float, None, "fine-structure constant override (hydrogen-like mode)")
    _opt(g, "--chi", float, None, "coupling (synthetic mode)")
    _opt(g, "--a", float, None, "transition frequency over cutoff (synthetic mode)")
    _opt(g, "--cutoff-lambda", float, None, "cutoff in rad/s")
    _opt(g, "--quad-tol", float, 1e-11, "cut-integral quadrature tolerance")
    _opt(g, "--pole-tol", float, 1e-14, "pole residual tolerance")
    _opt(g, "--output", str, "-", "output path, '-' for stdout", metavar="PATH")
    _opt(g, "--format", str, "csv", "output format", choices=("csv", "json"))
    parser.add_argument("--config", default=None, help=f"key = value file (also ${CONFIG_ENV})")


def _grid(parser, t_min, t_max, points, scale="log"):
    _opt(parser, "--tmin", float, t_min, "first time in seconds")
    _opt(parser, "--tmax", float, t_max, "last time in seconds")
    _opt(parser, "--points", int, points, "number of grid points")
    _opt(parser, "--scale", str, scale, "grid spacing", choices=("log", "linear"))


def build_parser() -> argparse.ArgumentParser:
    _OPTIONS.clear()
    parser = argparse.ArgumentParser(prog="zenolab", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constants", help="derived constants, Zeno time and lifetime")
    _common(p)

    p = sub.add_parser("pole", help="decay pole, residue and leading-order values")
    _common(p)

    p = sub.add_parser("survival", help="survival probability time series")
    _common(p)
    _grid(p, 1e-18, 1e-15, 200)
    _opt(p, "--cut-method", str, "adaptive_truncated", "cut quadrature",
         choices=("adaptive_truncated", "gauss_laguerre"))
    _opt(p, "--nodes", int, 128, "node budget of the cut quadrature")

    p = sub.add_parser("crossover", help="end of the exponential era")
    _common(p)

    p = sub.add_parser("spectrum", help="spectral density on an energy grid")
    _common(p)
    _opt(p, "--xmin", float, 1e-4, "first energy in units of the cutoff")
    _opt(p, "--xmax", float, 10.0, "last energy in units of the cutoff")
    _opt(p, "--points", int, 200, "number of grid points")
    _opt(p, "--scale", str, "log", "grid spacing", choices=("log", "linear"))

    p = sub.add_parser("selfenergy", help="reduced self-energy at one point")
    _common(p)
    _opt(p, "--s-re", float, 1.0, "real part of s")
    _opt(p, "--s-im", float, 0.0, "imaginary part of s")
    _opt(p, "--sheet", str, "first", "Riemann sheet", choices=("first", "second"))
    p.add_argument("--quadrature", action="store_true", help="also evaluate by direct quadrature")

    for name, helptext in (("oracle", "brute-force survival amplitude"),
                           ("compare", "pole+cut against an oracle")):
        p = sub.add_parser(name, help=helptext)
        if name == "oracle":
            p.add_argument("method", choices=("bromwich", "spectral", "discrete"))
        else:
            p.add_argument("--oracle", dest="method", choices=("bromwich", "spectral", "discrete"),
                           default="bromwich")
        _common(p)
        _grid(p, 1e-18, 1e-15, 40)
        _opt(p, "--oracle-tol", float, 1e-10, "oracle quadrature tolerance")
        _opt(p, "--abscissa", float, None, "Bromwich abscissa (default 1/tau)")
        _opt(p, "--modes", int, 4000, "modes of the discretized continuum")
        _opt(p, "--mode-xmax", float, 20.0, "upper edge of the discretized continuum")
    return parser


def read_config(path: str) -> dict[str, str]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected key = value")
            key, value = (x.strip() for x in line.split("=", 1))
            out[key.lstrip("-").replace("-", "_")] = value
    return out


def resolve(args, config: dict[str, str]) -> argparse.Namespace:
    """Fill unset options from the config file, then from the defaults."""
    ns = vars(args)
    known = {k for k in _OPTIONS}
    bad = set(config) - known - {"quadrature", "method"}
    if bad:
        raise UsageError(f"unknown config keys {sorted(bad)}")
    for dest, (conv, default) in _OPTIONS.items():
        if dest not in ns:
            continue
        if ns[dest] is None and dest in config:
            try:
                ns[dest] = conv(config[dest])
            except ValueError as exc:
                raise UsageError(f"config key {dest}: {exc}") from exc
        if ns[dest] is None:
            ns[dest] = default
    return args


def run_config(args) -> RunConfig:
    overrides = {k: getattr(args, k) for k in ("alpha", "chi", "a", "cutoff_lambda")
                 if getattr(args, k) is not None}
    return RunConfig(z=args.z, overrides=overrides, quad_tol=args.quad_tol, pole_tol=args.pole_tol,
                     output_path=args.output, output_format=args.format)


# ----------------------------------------------------------------------------- commands

def _cmd_constants(args, cfg):
    params = cfg.params()
    pole = find_pole(params, tol=cfg.pole_tol)
    alpha = cfg.overrides.get("alpha", PhysicalConstants().alpha)
    rows = [
        ("z", params.z, ""),
        ("alpha", alpha if params.z else float("nan"), ""),
        ("cutoff_lambda", params.cutoff_lambda, "rad/s"),
        ("chi", params.chi, ""),
        ("a", params.a, ""),
        ("omega0", params.omega0, "rad/s"),
        ("zeno_time", zeno_time(params), "s"),
        ("zeno_time_corrected", zeno_time(params, corrected=True), "s"),
        ("gamma", pole.gamma, "1/s"),
        ("lifetime", pole.lifetime, "s"),
        ("delta_e", pole.delta_e, "rad/s"),
        ("tail_constant", float(np.real(tail_constant(params))), ""),
    ]
    if cfg.output_format == "csv":
        _emit_rows([{"name": n, "value": v, "unit": u} for n, v, u in rows], cfg, params)
    else:
        _write(dumps_json({"params": params.as_dict(),
                           "constants": {n: v for n, v, _ in rows}}), cfg.output_path)


def _cmd_pole(args, cfg):
    params = cfg.params()
    pole = find_pole(params, tol=cfg.pole_tol)
    lo = perturbative_pole(params)
    row = pole.as_dict()
    row.update(gamma_leading=lo.gamma, delta_e_leading=lo.delta_e,
               delta_e_over_chi_lambda=pole.delta_e / (params.chi * params.cutoff_lambda))
    _emit_rows([row], cfg, params, key="pole")


def _cmd_survival(args, cfg):
    params = cfg.params()
    pole = find_pole(params, tol=cfg.pole_tol)
    samples = timeseries(params, pole, cfg.cut_spec(args.cut_method, args.nodes),
                         args.tmin, args.tmax, args.points, args.scale)
    emit(samples, cfg.output_format, cfg.output_path, params)


def _cmd_crossover(args, cfg):
    params = cfg.params()
    pole = find_pole(params, tol=cfg.pole_tol)
    c = crossover_time(params, pole, cfg.cut_spec())
    _emit_rows([dataclasses.asdict(c)], cfg, params, key="crossover")


def _cmd_spectrum(args, cfg):
    params = cfg.params()
    x = time_grid(args.xmin, args.xmax, args.points, args.scale)
    w = spectral_density(x, params)
    _emit_rows([{"x": float(xi), "w": float(wi)} for xi, wi in zip(x, w)], cfg, params)


def _cmd_selfenergy(args, cfg):
    s = complex(args.s_re, args.s_im)
    sheet = Sheet.FIRST if args.sheet == "first" else Sheet.SECOND
    q, dq = qbar(s, sheet), qbar_derivative(s, sheet)
    row = {"s_re": s.real, "s_im": s.imag, "sheet": args.sheet,
           "qbar_re": q.real, "qbar_im": q.imag, "dqbar_re": dq.real, "dqbar_im": dq.imag}
    if args.quadrature:
        if sheet is not Sheet.FIRST:
            raise UsageError("--quadrature is available on the first sheet only")
        qq = qbar_quadrature(s)
        row.update(quad_re=qq.real, quad_im=qq.imag)
    _emit_rows([row], cfg, cfg.params(), key="selfenergy")


def _oracle_values(args, params, taus):
    if args.method == "bromwich":
        return np.array([bromwich_inverse(t, params, args.abscissa, args.oracle_tol) for t in taus])
    if args.method == "spectral":
        return np.array([spectral_inverse(t, params, args.oracle_tol) for t in taus])
    model = DiscretizedModel.build(params, args.modes, args.mode_xmax)
    return diagonalize(model, params).amplitude(taus)


def _cmd_oracle(args, cfg):
    params = cfg.params()
    t = time_grid(args.tmin, args.tmax, args.points, args.scale)
    taus = params.to_tau(t)
    ys = _oracle_values(args, params, taus)
    rows = [{"t_s": float(ti), "tau": float(ta), "y_re": y.real, "y_im": y.imag, "p": abs(y) ** 2}
            for ti, ta, y in zip(t, taus, ys)]
    _emit_rows(rows, cfg, params, key="samples", extra={"oracle": args.method})


def _cmd_compare(args, cfg):
    params = cfg.params()
    pole = find_pole(params, tol=cfg.pole_tol)
    spec = cfg.cut_spec()
    t = time_grid(args.tmin, args.tmax, args.points, args.scale)
    taus = params.to_tau(t)
    ref = _oracle_values(args, params, taus)
    ours = np.array([y_pole_term(ta, pole) + y_cut_term(ta, params, spec) for ta in taus])
    err = np.abs(ours - ref)
    perr = np.abs(np.abs(ours) ** 2 - np.abs(ref) ** 2)
    row = {"oracle": args.method, "points": len(t), "max_abs_error": float(err.max()),
           "mean_abs_error": float(err.mean()), "max_abs_error_p": float(perr.max()),
           "t_at_max_error": float(t[int(np.argmax(err))])}
    _emit_rows([row], cfg, params, key="comparison")


COMMANDS = {
    "constants": _cmd_constants,
    "pole": _cmd_pole,
    "survival": _cmd_survival,
    "crossover": _cmd_crossover,
    "spectrum": _cmd_spectrum,
    "selfenergy": _cmd_selfenergy,
    "oracle": _cmd_oracle,
    "compare": _cmd_compare,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        path = args.config or os.environ.get(CONFIG_ENV)
        try:
            config = read_config(path) if path else {}
        except OSError as exc:
            print(f"zenolab: cannot read config: {exc}", file=sys.stderr)
            return EXIT_IO
        resolve(args, config)
        cfg = run_config(args)
        COMMANDS[args.command](args, cfg)
    except (UsageError, DomainError, ValueError) as exc:
        print(f"zenolab: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConvergenceError, ArithmeticError) as exc:
        print(f"zenolab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"zenolab: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def main() -> None:
    sys.exit(run())

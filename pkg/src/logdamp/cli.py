"""Command-line driver: ``logdamp {roots,delta,evolve,rates,profile,verify-all}``.

Exit codes: 0 all verdicts pass, 1 a verdict failed, 2 usage or parameter
error, 3 quadrature did not converge, 4 I/O failure.
"""
from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from xml.sax.saxutils import escape

from . import experiments as ex
from .data import CATALOG_KEYS, DataPair, parse_data_key
from .errors import LogDampError, NoConvergence
from .model import char_roots, classify, threshold_delta
from .spectral import eval_what, ode_oracle

__all__ = ["RunConfig", "build_parser", "parse_config", "run", "main", "emit_csv", "emit_svg", "format_number"]

COMMANDS = ("roots", "delta", "evolve", "rates", "profile", "verify-all")
FORMATS = ("csv", "svg", "both")
EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NOCONV, EXIT_IO = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    mu: float | None = None
    dim: int | None = None
    data_key: str = "gaussian:1,1"
    r: float | None = None
    t: float | None = None
    t_min: float = 1e2
    t_max: float = 1e4
    points: int = 20
    tol: float | None = None
    out_path: str | None = None
    format: str = "csv"

    @property
    def grid(self) -> ex.TimeGrid:
        return ex.TimeGrid(self.t_min, self.t_max, self.points)


def _positive_float(text):
    try:
        x = float(text)
    except (TypeError, ValueError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (x > 0 and math.isfinite(x)):
        raise argparse.ArgumentTypeError(f"must be positive and finite: {text!r}")
    return x


def _nonneg_float(text):
    try:
        x = float(text)
    except (TypeError, ValueError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (x >= 0 and math.isfinite(x)):
        raise argparse.ArgumentTypeError(f"must be nonnegative and finite: {text!r}")
    return x


def _positive_int(text):
    try:
        k = int(str(text).strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if k < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {text!r}")
    return k


def _format(text):
    if text not in FORMATS:
        raise argparse.ArgumentTypeError(f"format must be one of {', '.join(FORMATS)}")
    return text


# config key -> (converter, RunConfig field)
_KEYS = {
    "mu": (_positive_float, "mu"),
    "dim": (_positive_int, "dim"),
    "data": (str, "data_key"),
    "r": (_nonneg_float, "r"),
    "t": (_nonneg_float, "t"),
    "t_min": (_positive_float, "t_min"),
    "t_max": (_positive_float, "t_max"),
    "points": (_positive_int, "points"),
    "tol": (_positive_float, "tol"),
    "out": (str, "out_path"),
    "format": (_format, "format"),
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="logdamp",
                                description="Wave equation with logarithmic damping: roots, norms and rate checks.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--mu", type=_positive_float, help="damping coefficient")
    p.add_argument("--dim", type=_positive_int, help="space dimension n")
    p.add_argument("--data", help=f"datum key ({', '.join(CATALOG_KEYS)}); default gaussian:1,1")
    p.add_argument("--r", type=_nonneg_float, help="frequency |xi| (roots, evolve)")
    p.add_argument("--t", type=_nonneg_float, help="time (evolve)")
    p.add_argument("--t-min", dest="t_min", type=_positive_float, help="first time of the grid (default 1e2)")
    p.add_argument("--t-max", dest="t_max", type=_positive_float, help="last time of the grid (default 1e4)")
    p.add_argument("--points", type=_positive_int, help="grid points (default 20)")
    p.add_argument("--tol", type=_positive_float, help="override the slope tolerance")
    p.add_argument("--out", help="output path for CSV/SVG")
    p.add_argument("--format", type=_format, help="csv, svg or both (default csv)")
    p.add_argument("--config", help="flat 'key = value' file; flags take precedence")
    return p


def read_config_file(path: str) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc.strerror or exc}") from None
    except UnicodeDecodeError:
        raise UsageError(f"config file {path} is not UTF-8") from None
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _KEYS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        conv, field_name = _KEYS[key]
        try:
            values[field_name] = conv(value)
        except argparse.ArgumentTypeError as exc:
            raise UsageError(f"{path}:{lineno}: {key}: {exc}") from None
    return values


def parse_config(argv=None) -> RunConfig:
    """Flags over file values over defaults. Raises SystemExit(2) or UsageError."""
    args = build_parser().parse_args(argv)
    values = read_config_file(args.config) if args.config else {}
    for key, (_, field_name) in _KEYS.items():
        flag = getattr(args, key)
        if flag is not None:
            values[field_name] = flag
    cfg = RunConfig(command=args.command, **values)
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig):
    needs_mu = cfg.command in ("roots", "delta", "evolve", "rates", "profile")
    if needs_mu and cfg.mu is None:
        raise UsageError(f"{cfg.command} requires --mu")
    if cfg.command in ("evolve", "rates", "profile") and cfg.dim is None:
        raise UsageError(f"{cfg.command} requires --dim")
    if cfg.command == "roots" and cfg.r is None:
        raise UsageError("roots requires --r")
    if cfg.command == "evolve" and cfg.t is None:
        raise UsageError("evolve requires --t")
    if not cfg.t_min < cfg.t_max:
        raise UsageError("t-min must be below t-max")
    if cfg.points < 5:
        raise UsageError("points must be at least 5")
    if cfg.dim is not None:
        parse_data_key(cfg.data_key, cfg.dim)  # rejects unknown keys early
    if cfg.format != "csv" and not cfg.out_path:
        raise UsageError("--format svg/both needs --out")


# output --------------------------------------------------------------------------

def format_number(x: float) -> str:
    """17 significant digits, enough to round-trip a double."""
    return format(float(x), ".17g")


def _csv_text(series, columns=None, verdicts=()):
    columns = dict(columns or {})
    names = [k for k in ("profile_diff", "tail_norm") if k in columns]
    value = columns.get("value")
    lines = [",".join(["t", "value"] + names)]
    for i, (t, y) in enumerate(series):
        row = [t, value[i] if value is not None else y] + [columns[k][i] for k in names]
        lines.append(",".join(format_number(v) for v in row))
    if verdicts:
        lines.append("# name,expected,measured,tolerance,pass")
        for v in verdicts:
            for item in v.flatten():
                lines.append("# " + ",".join([item.name, format_number(item.expected), format_number(item.measured),
                                              format_number(item.tolerance), "true" if item.passed else "false"]))
    return "\n".join(lines) + "\n"


def emit_csv(series, path, columns=None, verdicts=()) -> None:
    """Write ``t,value[,profile_diff,tail_norm]`` rows plus verdict comments."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_csv_text(series, columns, verdicts))


def read_csv(path):
    """Inverse of :func:`emit_csv` for the numeric part: ``(header, rows)``."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if not ln.startswith("#")]
    header = lines[0].split(",")
    return header, [tuple(float(x) for x in ln.split(",")) for ln in lines[1:] if ln]


_W, _H, _PAD = 640, 420, 60


def _svg_text(series, expected_slope=None, title=""):
    pts = [(float(t), float(y)) for t, y in series]
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_W}" height="{_H}" '
            f'viewBox="0 0 {_W} {_H}">')
    parts = [head, f'<rect width="{_W}" height="{_H}" fill="white"/>']
    if title:
        parts.append(f'<text x="{_W / 2}" y="24" text-anchor="middle" font-size="14">{escape(title)}</text>')
    if not pts:
        parts.append(f'<text x="{_W / 2}" y="{_H / 2}" text-anchor="middle" font-size="16">no data</text>')
        parts.append("</svg>")
        return "\n".join(parts) + "\n"

    log_axes = all(t > 0 and y > 0 for t, y in pts)
    if not log_axes:
        parts.append("<!-- warning: nonpositive values, linear axes used -->")
    fx = math.log10 if log_axes else float
    xs = [fx(t) for t, _ in pts]
    ys = [fx(y) for _, y in pts]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if log_axes:
        x0, x1 = math.floor(x0), max(math.ceil(x1), math.floor(x0) + 1)
        y0, y1 = math.floor(y0), max(math.ceil(y1), math.floor(y0) + 1)
    else:
        if x1 == x0:
            x0, x1 = x0 - 1, x1 + 1
        if y1 == y0:
            y0, y1 = y0 - 1, y1 + 1

    def sx(v):
        return _PAD + (v - x0) / (x1 - x0) * (_W - 2 * _PAD)

    def sy(v):
        return _H - _PAD - (v - y0) / (y1 - y0) * (_H - 2 * _PAD)

    parts.append(f'<line x1="{_PAD}" y1="{_H - _PAD}" x2="{_W - _PAD}" y2="{_H - _PAD}" stroke="black"/>')
    parts.append(f'<line x1="{_PAD}" y1="{_PAD}" x2="{_PAD}" y2="{_H - _PAD}" stroke="black"/>')
    if log_axes:
        for k in range(int(x0), int(x1) + 1):
            parts.append(f'<line x1="{sx(k):.2f}" y1="{_H - _PAD}" x2="{sx(k):.2f}" y2="{_H - _PAD + 5}" stroke="black"/>')
            parts.append(f'<text x="{sx(k):.2f}" y="{_H - _PAD + 20}" text-anchor="middle" font-size="12">1e{k}</text>')
        for k in range(int(y0), int(y1) + 1):
            parts.append(f'<line x1="{_PAD - 5}" y1="{sy(k):.2f}" x2="{_PAD}" y2="{sy(k):.2f}" stroke="black"/>')
            parts.append(f'<text x="{_PAD - 8}" y="{sy(k) + 4:.2f}" text-anchor="end" font-size="12">1e{k}</text>')
    else:
        for v, lab in ((x0, x0), (x1, x1)):
            parts.append(f'<text x="{sx(v):.2f}" y="{_H - _PAD + 20}" text-anchor="middle" font-size="12">{lab:.3g}</text>')
        for v in (y0, y1):
            parts.append(f'<text x="{_PAD - 8}" y="{sy(v) + 4:.2f}" text-anchor="end" font-size="12">{v:.3g}</text>')

    poly = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
    parts.append(f'<polyline points="{poly}" fill="none" stroke="steelblue" stroke-width="2"/>')
    if expected_slope is not None and log_axes:
        # reference line through the mean point of the data
        mx, my = sum(xs) / len(xs), sum(ys) / len(ys)
        a, b = min(xs), max(xs)
        ya, yb = my + expected_slope * (a - mx), my + expected_slope * (b - mx)
        parts.append(f'<line x1="{sx(a):.2f}" y1="{sy(ya):.2f}" x2="{sx(b):.2f}" y2="{sy(yb):.2f}" '
                     f'stroke="firebrick" stroke-dasharray="6 4" stroke-width="1.5"/>')
        parts.append(f'<text x="{_W - _PAD}" y="{_PAD - 8}" text-anchor="end" font-size="12" fill="firebrick">'
                     f'reference slope {expected_slope:g}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_svg(series, path, expected_slope: float | None = None, title: str = "") -> None:
    """Log-log line plot with a dashed reference slope; no external assets."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_svg_text(series, expected_slope, title))


# commands ------------------------------------------------------------------------

def _pair(cfg: RunConfig) -> DataPair:
    d = parse_data_key(cfg.data_key, cfg.dim)
    return DataPair(d, d)


def _print_verdicts(verdicts, stream=sys.stdout):
    for v in verdicts:
        for item in v.flatten():
            status = "PASS" if item.passed else "FAIL"
            stream.write(f"{status} {item.name}: measured {item.measured:.6g}, expected {item.expected:g} "
                         f"({item.mode}, tol {item.tolerance:g})\n")


def _paths(cfg: RunConfig):
    out = Path(cfg.out_path)
    if cfg.format == "csv":
        return out, None
    if cfg.format == "svg":
        return None, out
    return out.with_suffix(".csv"), out.with_suffix(".svg")


def _write(cfg: RunConfig, verdict_list, main=None):
    if not cfg.out_path:
        return
    csv_path, svg_path = _paths(cfg)
    series = main.series if main is not None else ()
    columns = main.columns if main is not None else None
    if csv_path is not None:
        emit_csv(series, csv_path, columns, verdict_list)
    if svg_path is not None:
        emit_svg(series, svg_path, main.expected if main is not None else None,
                 main.name if main is not None else "")


def _cmd_roots(cfg):
    roots = char_roots(cfg.mu, cfg.r)
    print(f"regime = {classify(cfg.mu).value}")
    print(f"lambda_plus = {roots.lambda_plus.real:.17g}{roots.lambda_plus.imag:+.17g}j")
    print(f"lambda_minus = {roots.lambda_minus.real:.17g}{roots.lambda_minus.imag:+.17g}j")
    print(f"discriminant = {roots.discriminant:.17g}")
    return EXIT_OK


def _cmd_delta(cfg):
    th = threshold_delta(cfg.mu)
    print(f"delta = {th.delta:.15g}")
    print(f"delta1 = {th.delta1:.15g}")
    print(f"c = {th.c:.15g}  d = {th.d:.15g}  c1 = {th.c1:.15g}  d1 = {th.d1:.15g}")
    return EXIT_OK


def _cmd_evolve(cfg):
    pair = _pair(cfg)
    print(f"t = {cfg.t:.17g}")
    print(f"norm = {ex.solution_norm(pair, cfg.mu, cfg.t):.17g}")
    if cfg.r is not None:
        w = complex(eval_what(pair, cfg.mu, cfg.r, cfg.t))
        print(f"w_hat = {w.real:.17g}")
        if cfg.t <= 1e3:
            print(f"rk4 = {ode_oracle(pair, cfg.mu, cfg.r, cfg.t).real:.17g}")
    return EXIT_OK


def _with_tol(cfg, kwargs):
    if cfg.tol is not None:
        kwargs["tol"] = cfg.tol
    return kwargs


def _cmd_rates(cfg):
    v = ex.run_solution_norm_rates(cfg.dim, cfg.mu, _pair(cfg), cfg.grid, **_with_tol(cfg, {}))
    _print_verdicts([v])
    _write(cfg, [v], v)
    return EXIT_OK if v.all_passed else EXIT_FAIL


def _cmd_profile(cfg):
    v = ex.run_profile_convergence(cfg.dim, cfg.mu, _pair(cfg), cfg.grid, **_with_tol(cfg, {}))
    _print_verdicts([v])
    _write(cfg, [v], v)
    return EXIT_OK if v.all_passed else EXIT_FAIL


def _cmd_verify_all(cfg):
    dims = (cfg.dim,) if cfg.dim is not None else (1, 2, 3)
    mus = (cfg.mu,) if cfg.mu is not None else (1.0, 2.0, 4.0)
    verdicts = ex.verify_all(dims, mus, cfg.grid)
    _print_verdicts(verdicts)
    _write(cfg, verdicts)
    ok = all(v.all_passed for v in verdicts)
    print(f"{sum(v.all_passed for v in verdicts)}/{len(verdicts)} checks passed")
    return EXIT_OK if ok else EXIT_FAIL


_DISPATCH = {
    "roots": _cmd_roots,
    "delta": _cmd_delta,
    "evolve": _cmd_evolve,
    "rates": _cmd_rates,
    "profile": _cmd_profile,
    "verify-all": _cmd_verify_all,
}


def run(cfg: RunConfig) -> int:
    try:
        return _DISPATCH[cfg.command](cfg)
    except NoConvergence as exc:
        print(f"logdamp: no convergence: {exc}", file=sys.stderr)
        return EXIT_NOCONV
    except OSError as exc:
        print(f"logdamp: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (LogDampError, ValueError) as exc:
        print(f"logdamp: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (UsageError, LogDampError, ValueError) as exc:
        print(f"logdamp: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())

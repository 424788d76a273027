"""Command-line front end: ``ncx2mode {pdf,mode,sweep,bench}``.

Every command writes plot-ready CSV (default) or JSON.  Exit codes:
0 success, 2 usage or domain error, 3 approximation used outside its
applicability region, 4 mode search failure.
"""

from __future__ import annotations

import argparse
import enum
import json
import math
import sys

import numpy as np

from .bench import SweepMode, SweepSpec, grid, run_sweep
from .density import DomainError, Params, log_pdf
from .mode_approx import approx_mode, classify_mode
from .mode_exact import (
    DEFAULT_XTOL,
    ModeSearchError,
    ResultTag,
    Strategy,
    exact_mode,
    master_residual,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INAPPLICABLE = 3
EXIT_SOLVER = 4

PDF_FIELDS = ("x", "pdf", "log_pdf")
MODE_FIELDS = ("k", "lambda", "method", "tag", "location", "residual", "scale_t", "applicable")
SWEEP_FIELDS = ("k", "lambda", "mode_exact", "mode_approx", "abs_err", "scale_t")
BENCH_FIELDS = (
    "k",
    "lambda",
    "strategy",
    "doublings",
    "density_evaluations",
    "wall_ns_mean",
    "wall_ns_std",
    "failed",
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def format_value(v) -> str:
    """CSV token: shortest round-trip float repr, bare booleans and tags."""
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, enum.Enum):
        return v.value
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _json_value(v):
    if isinstance(v, enum.Enum):
        return v.value
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    return v


def render(fields, rows, fmt) -> str:
    if fmt == "json":
        objs = [{f: _json_value(r.get(f)) for f in fields} for r in rows]
        return json.dumps(objs, allow_nan=False) + "\n"
    lines = [",".join(fields)]
    lines.extend(",".join(format_value(r.get(f)) for f in fields) for r in rows)
    return "\n".join(lines) + "\n"


def emit(args, fields, rows):
    text = render(fields, rows, args.format)
    if args.out == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)


def _bool(text):
    low = text.strip().lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected true or false, got {text!r}")


def _strategies(text):
    try:
        return tuple(Strategy(s.strip().lower()) for s in text.split(",") if s.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _params(k, lam):
    try:
        return Params(k, lam)
    except DomainError as exc:
        raise UsageError(str(exc)) from None


def _warn(msg):
    print(f"ncx2mode: warning: {msg}", file=sys.stderr)


def cmd_pdf(args):
    p = _params(args.k, args.lam)
    if args.x is not None:
        xs = [args.x]
    else:
        if args.x_min is None or args.x_max is None:
            raise UsageError("give --x, or --x-min and --x-max")
        if args.points < 1 or args.x_max < args.x_min:
            raise UsageError("grid needs --points >= 1 and --x-max >= --x-min")
        xs = np.linspace(args.x_min, args.x_max, args.points).tolist()
    rows = []
    for x in xs:
        try:
            lf = log_pdf(p, x)
        except DomainError as exc:
            raise UsageError(str(exc)) from None
        rows.append({"x": float(x), "pdf": 0.0 if lf == -math.inf else math.exp(lf), "log_pdf": lf})
    emit(args, PDF_FIELDS, rows)
    return EXIT_OK


def _approx_row(p):
    approx = approx_mode(p)
    residual = master_residual(p, approx.value) if approx.value > 0.0 else None
    row = {
        "k": p.k,
        "lambda": p.lam,
        "method": "approx",
        "tag": classify_mode(p).tag,
        "location": approx.value,
        "residual": residual,
        "scale_t": approx.scale_t,
        "applicable": approx.applicable,
    }
    return row, approx.applicable


def _exact_row(p, strategy, xtol):
    result = exact_mode(p, strategy, xtol=xtol)
    if p.lam > 0.0:
        approx = approx_mode(p)
        scale_t, applicable = approx.scale_t, approx.applicable
    else:
        scale_t, applicable = None, False
    return {
        "k": p.k,
        "lambda": p.lam,
        "method": "exact",
        "tag": result.tag,
        "location": result.location,
        "residual": result.residual,
        "scale_t": scale_t,
        "applicable": applicable,
    }


def cmd_mode(args):
    p = _params(args.k, args.lam)
    if args.xtol <= 0.0:
        raise UsageError("--xtol must be > 0")
    method = args.method
    if method == "auto":
        method = "approx" if p.lam > 0.0 and approx_mode(p).applicable else "exact"
    if method == "approx":
        if p.lam <= 0.0:
            raise UsageError("the approximation needs lambda > 0")
        row, applicable = _approx_row(p)
        emit(args, MODE_FIELDS, [row])
        return EXIT_OK if applicable else EXIT_INAPPLICABLE
    try:
        row = _exact_row(p, args.strategy, args.xtol)
    except ModeSearchError as exc:
        print(f"ncx2mode: error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    emit(args, MODE_FIELDS, [row])
    return EXIT_OK


def _grid_from_args(args):
    if args.mode == "lambda":
        if args.k is None or args.lambda_min is None or args.lambda_max is None:
            raise UsageError("--mode lambda needs --k, --lambda-min and --lambda-max")
        return SweepMode.LAMBDA_SWEEP, args.k, (args.lambda_min, args.lambda_max), None
    if args.scale is None or args.k_min is None or args.k_max is None:
        raise UsageError("--mode k needs --scale, --k-min and --k-max")
    return SweepMode.K_SWEEP, (args.k_min, args.k_max), None, args.scale


def _spec_from_args(args, **extra):
    mode, k, lam, scale = _grid_from_args(args)
    try:
        return SweepSpec(mode=mode, k=k, lam=lam, points=args.points, scale_t=scale, **extra)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_sweep(args):
    spec = _spec_from_args(args)
    rows = []
    for k, lam in grid(spec):
        p = _params(k, lam)
        exact = approx = scale = math.nan
        try:
            result = exact_mode(p, Strategy.AUTO)
            if result.tag is ResultTag.INTERIOR:
                exact = result.location
            elif result.tag is ResultTag.AT_ZERO:
                exact = 0.0
        except ModeSearchError as exc:
            _warn(f"k={k!r} lambda={lam!r}: {exc}")
        if lam > 0.0:
            a = approx_mode(p)
            approx, scale = a.value, a.scale_t
        rows.append(
            {
                "k": k,
                "lambda": lam,
                "mode_exact": exact,
                "mode_approx": approx,
                "abs_err": abs(exact - approx),
                "scale_t": scale,
            }
        )
    emit(args, SWEEP_FIELDS, rows)
    return EXIT_OK


def cmd_bench(args):
    spec = _spec_from_args(
        args,
        strategies=args.strategies,
        reps=args.reps,
        jitter_sigma=args.jitter,
        seed=args.seed,
    )
    try:
        records = run_sweep(spec, timing=args.timing)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows = [
        {
            "k": r.k,
            "lambda": r.lam,
            "strategy": r.strategy,
            "doublings": r.doublings,
            "density_evaluations": r.density_evaluations,
            "wall_ns_mean": r.wall_ns_mean,
            "wall_ns_std": r.wall_ns_std,
            "failed": r.failed,
        }
        for r in records
    ]
    for r in records:
        if r.failed:
            _warn(f"k={r.k!r} lambda={r.lam!r} strategy={r.strategy.value}: search failed")
    emit(args, BENCH_FIELDS, rows)
    return EXIT_OK


def _add_output(sp):
    sp.add_argument("--out", default="-", help="output file, '-' for stdout")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")


def _add_grid(sp, points):
    sp.add_argument("--mode", choices=("lambda", "k"), required=True)
    sp.add_argument("--k", type=float)
    sp.add_argument("--k-min", type=float)
    sp.add_argument("--k-max", type=float)
    sp.add_argument("--lambda-min", type=float)
    sp.add_argument("--lambda-max", type=float)
    sp.add_argument("--scale", type=float, help="fixed k/lambda for --mode k")
    sp.add_argument("--points", type=int, default=points)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ncx2mode", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("pdf", help="evaluate the density")
    sp.add_argument("--k", type=float, required=True)
    sp.add_argument("--lambda", dest="lam", type=float, required=True)
    sp.add_argument("--x", type=float)
    sp.add_argument("--x-min", type=float)
    sp.add_argument("--x-max", type=float)
    sp.add_argument("--points", type=int, default=101)
    _add_output(sp)
    sp.set_defaults(func=cmd_pdf)

    sp = sub.add_parser("mode", help="approximate or exact mode")
    sp.add_argument("--k", type=float, required=True)
    sp.add_argument("--lambda", dest="lam", type=float, required=True)
    sp.add_argument("--method", choices=("approx", "exact", "auto"), default="auto")
    sp.add_argument("--strategy", type=Strategy, choices=list(Strategy), default=Strategy.AUTO,
                    metavar="{naive,corrected,auto}")
    sp.add_argument("--xtol", type=float, default=DEFAULT_XTOL)
    _add_output(sp)
    sp.set_defaults(func=cmd_mode)

    sp = sub.add_parser("sweep", help="exact vs approximate mode over a grid")
    _add_grid(sp, points=10)
    _add_output(sp)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("bench", help="compare initial-guess strategies")
    _add_grid(sp, points=25)
    sp.add_argument("--strategies", type=_strategies, default=(Strategy.NAIVE, Strategy.CORRECTED))
    sp.add_argument("--reps", type=int, default=100)
    sp.add_argument("--jitter", type=float, default=1e-6)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--timing", type=_bool, default=False)
    _add_output(sp)
    sp.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"ncx2mode: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"ncx2mode: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

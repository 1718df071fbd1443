"""
Command-line interface.

    pwbreak fit      data.csv --degree 1 --segments 6 --out report.json
    pwbreak select   data.csv --init-segments 8 --tau 1.05 --out report.json
    pwbreak generate --seed 3 --out data.csv --truth truth.json
    pwbreak eval     data.csv report.json

Exit status: 0 success, 2 invalid input, 3 numerical failure, 1 anything else.
"""

import argparse
import json
import logging
import sys

import numpy as np

from . import __version__
from .constrained_ls import fit_piecewise
from .core import BreakpointVector, validate_and_sort
from .errors import InvalidInput, SingularSystem
from .metrics import evaluate
from .report import build_report, dump_report, jsonable, load_report, read_xy_csv, write_xy_csv
from .search import greedy_fit, quantile_init, random_init, uniform_init
from .selection import select_breakpoints
from .synthetic import DEFAULT_KNOTS, GeneratorSpec, generate

log = logging.getLogger("pwbreak")

EXIT_OK, EXIT_INTERNAL, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(InvalidInput):
    pass


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _initial(ds, k, how, seed):
    if how == "random":
        if seed is None:
            raise UsageError("--init random requires --seed")
        return random_init(ds, k, seed)
    if how == "uniform":
        return uniform_init(ds, k)
    return quantile_init(ds, k)


def _min_seg(args):
    return args.min_seg_points if args.min_seg_points is not None else args.degree + 1


def _write_grid(path, model, points):
    bp = model.breakpoints
    xs = np.linspace(bp.left_end, bp.right_end, points)
    write_xy_csv(path, xs, model.predict(xs), header=("x", "yhat"))


def _finish(args, command, ds, digest, model, **extra):
    metrics = evaluate(ds.ys, model.predict(ds.xs), bps=model.breakpoints.interior.size)
    doc = build_report(command, model, metrics, input_digest=digest, seed=args.seed, **extra)
    dump_report(doc, args.out)
    if args.pred_grid:
        _write_grid(args.pred_grid, model, args.grid_points)
    log.info("%s: %d breakpoints, mse=%.6g -> %s", command,
             model.breakpoints.interior.size, metrics.mse, args.out)


def cmd_fit(args):
    xs, ys, digest = read_xy_csv(args.input)
    ds = validate_and_sort(xs, ys)
    if args.breakpoints is not None:
        bp = BreakpointVector.for_dataset(ds, sorted(args.breakpoints))
        model, _ = fit_piecewise(ds, bp, args.degree)
        _finish(args, "fit", ds, digest, model, init="fixed")
        return EXIT_OK
    init = _initial(ds, args.segments, args.init, args.seed)
    model, _, trace = greedy_fit(ds, init, args.degree, max_iterations=args.max_iterations,
                                 min_seg_points=_min_seg(args), workers=args.workers)
    _finish(args, "fit", ds, digest, model, init=args.init, trace=trace.summary())
    return EXIT_OK


def cmd_select(args):
    if not args.tau >= 1:
        raise UsageError(f"--tau must be >= 1, got {args.tau}")
    if args.max_bps < 0:
        raise UsageError(f"--max-bps must be >= 0, got {args.max_bps}")
    xs, ys, digest = read_xy_csv(args.input)
    ds = validate_and_sort(xs, ys)
    k0 = args.init_segments or min(15, ds.n // 10) + 1
    init = _initial(ds, k0, args.init, args.seed)
    report = select_breakpoints(ds, init, args.degree, tau=args.tau, p=args.max_bps,
                                max_iterations=args.max_iterations,
                                min_seg_points=_min_seg(args), workers=args.workers)
    selection = report.to_dict()
    selection.update(tau=args.tau, max_bps=args.max_bps, init_segments=k0)
    _finish(args, "select", ds, digest, report.final_model, init=args.init,
            selection=selection)
    return EXIT_OK


def cmd_generate(args):
    # --spec default supplies whatever --knots/--values leave open
    knots = tuple(args.knots) if args.knots else DEFAULT_KNOTS
    values = tuple(args.values) if args.values else None
    spec = GeneratorSpec(knots=knots, knot_values=values, noise_sigma=args.sigma,
                         n=args.n, seed=args.seed)
    ds, truth = generate(spec)
    write_xy_csv(args.out, ds.xs, ds.ys)
    if args.truth:
        doc = truth.to_dict()
        doc.update(seed=args.seed, noise_sigma=args.sigma, n=args.n,
                   f=[float(v) for v in truth.f(ds.xs)])
        with open(args.truth, "w", encoding="utf-8") as fh:
            json.dump(jsonable(doc), fh, indent=2, allow_nan=False)
            fh.write("\n")
    return EXIT_OK


def cmd_eval(args):
    xs, ys, _ = read_xy_csv(args.input)
    ds = validate_and_sort(xs, ys)
    _, model = load_report(args.report)
    metrics = evaluate(ds.ys, model.predict(ds.xs), bps=model.breakpoints.interior.size)
    print(json.dumps(jsonable(metrics.to_dict()), allow_nan=False))
    return EXIT_OK


def _common_fit_options(p):
    p.add_argument("input", help="CSV file with columns x,y")
    p.add_argument("--degree", type=_positive_int, default=1)
    p.add_argument("--init", choices=("quantile", "uniform", "random"), default="quantile",
                   help="initial breakpoint placement (default: quantile)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--max-iterations", type=_positive_int, default=200)
    p.add_argument("--min-seg-points", type=_positive_int, default=None,
                   help="fewest samples per segment during search (default: degree+1)")
    p.add_argument("--workers", type=_positive_int, default=None,
                   help="threads for the per-breakpoint updates of a sweep")
    p.add_argument("--out", required=True, help="report file to write (JSON)")
    p.add_argument("--pred-grid", help="also write a dense x,yhat grid to this CSV")
    p.add_argument("--grid-points", type=_positive_int, default=512)


def build_parser():
    parser = argparse.ArgumentParser(prog="pwbreak", description=__doc__.split("\n\n")[0].strip())
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit with fixed breakpoints or a fixed segment count")
    _common_fit_options(p)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--breakpoints", type=_floats, help="interior breakpoints, e.g. 2.5,7.5")
    group.add_argument("--segments", type=_positive_int, help="number of segments to search for")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("select", help="choose the number of breakpoints by pruning")
    _common_fit_options(p)
    p.add_argument("--init-segments", type=_positive_int, default=None,
                   help="starting segment count (default: min(15, n // 10) + 1)")
    p.add_argument("--tau", type=float, default=1.05, help="MSE ratio threshold, >= 1")
    p.add_argument("--max-bps", type=int, default=0,
                   help="stop once this many interior breakpoints remain")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("generate", help="write synthetic piecewise-linear data")
    p.add_argument("--spec", choices=("default",), default="default")
    p.add_argument("--knots", type=_floats, default=None)
    p.add_argument("--values", type=_floats, default=None,
                   help="f at the knots (default: random integers in -15..15)")
    p.add_argument("--sigma", type=float, default=2.0)
    p.add_argument("--n", type=_positive_int, default=400)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--truth", help="also write the noiseless signal to this JSON file")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("eval", help="score a report's model on a CSV")
    p.add_argument("input")
    p.add_argument("report")
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except SingularSystem as exc:
        print(f"pwbreak: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InvalidInput, OSError) as exc:
        print(f"pwbreak: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001
        print(f"pwbreak: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface: ``fqatest {test,simulate,size,power}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .core import ValidationError, save_csv
from .dgp import ALT_KINDS, NOISE_KINDS, NULL_KINDS, Contamination, ScenarioSpec, generate
from .fqa import DegenerateCellError, FqaGrid
from .harness import ExperimentSpec, format_results_table, run_data_test, run_power, run_size
from .inference import DEFAULT_BANDWIDTH, DEFAULT_M

EXIT_VALIDATION = 2


class UsageError(ValueError):
    pass


def parse_float_range(text):
    """``"0.05:0.95:0.05"`` (inclusive) or ``"0.1,0.5,0.9"`` -> list of floats."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"range {text!r} must be start:stop:step")
        start, stop, step = (float(x) for x in parts)
        if step <= 0:
            raise UsageError("range step must be positive")
        n = int(round((stop - start) / step))
        if n < 0 or abs(start + n * step - stop) > 1e-9 * max(1.0, abs(stop)):
            raise UsageError(f"range {text!r} does not reach its stop value in whole steps")
        return [round(start + k * step, 10) for k in range(n + 1)]
    return [float(x) for x in text.split(",") if x.strip()]


def parse_int_range(text):
    """``"1..10"`` (inclusive) or ``"1,2,5"`` -> list of ints."""
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        lo, hi = int(lo), int(hi)
        if hi < lo:
            raise UsageError(f"empty range {text!r}")
        return list(range(lo, hi + 1))
    return [int(x) for x in text.split(",") if x.strip()]


def parse_sweep(text):
    """``"c=0:0.8:0.2"`` -> ("c", [0.0, 0.2, 0.4, 0.6, 0.8])."""
    if "=" not in text:
        raise UsageError(f"sweep {text!r} must look like name=start:stop:step")
    name, values = text.split("=", 1)
    vals = parse_float_range(values)
    if name == "T":
        vals = [int(v) for v in vals]
    return name.strip(), vals


def parse_contamination(text):
    parts = [float(x) for x in text.split(",")]
    if len(parts) != 3:
        raise UsageError("--contaminate takes curve_frac,point_frac,height")
    return Contamination(*parts)


def parse_bandwidth(text):
    return "auto" if text == "auto" else int(text)


def _grid(args):
    levels = parse_float_range(args.levels)
    if args.general:
        thresholds = parse_float_range(args.thresholds) if args.thresholds else levels
        return FqaGrid(levels=levels, thresholds=thresholds, reduced=False)
    return FqaGrid(levels=levels)


def _add_common_test_args(p):
    p.add_argument("--levels", default="0.05:0.95:0.05", help="quantile levels (start:stop:step or list)")
    p.add_argument("--reduced", action="store_true", default=True, help="thresholds equal levels (default)")
    p.add_argument("--general", action="store_true", help="independent threshold grid")
    p.add_argument("--thresholds", help="threshold grid for --general")
    p.add_argument("--mc", type=int, default=DEFAULT_M, help="Monte Carlo null sample size")
    p.add_argument("--bandwidth", type=parse_bandwidth, default=DEFAULT_BANDWIDTH,
                   help="Bartlett lag-window half-width, or 'auto' for floor(T^(1/3)) (default 0)")


def build_parser():
    parser = argparse.ArgumentParser(prog="fqatest", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("test", help="omnibus test of a CSV functional time series")
    t.add_argument("csv")
    t.add_argument("--lags", type=parse_int_range, default=[1])
    t.add_argument("--alpha", type=parse_float_range, default=[0.05])
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--log-returns", action="store_true")
    t.add_argument("--header", action="store_true", help="skip the first CSV line")
    t.add_argument("--out", help="JSON report path")
    _add_common_test_args(t)

    s = sub.add_parser("simulate", help="generate a scenario as CSV plus JSON sidecar")
    s.add_argument("--scenario", required=True, choices=NULL_KINDS + ALT_KINDS)
    s.add_argument("--T", type=int, default=200)
    s.add_argument("--p", type=int, default=500)
    s.add_argument("--c", type=float, default=0.0)
    s.add_argument("--C", type=float, default=0.0)
    s.add_argument("--noise", choices=NOISE_KINDS, default="gaussian")
    s.add_argument("--contaminate", type=parse_contamination)
    s.add_argument("--burn-in", type=int, default=50)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)

    for name, kinds in (("size", NULL_KINDS + ALT_KINDS), ("power", ALT_KINDS)):
        e = sub.add_parser(name, help=f"{name} experiment")
        e.add_argument("--scenario", required=True, choices=kinds)
        e.add_argument("--T", type=int, default=200)
        e.add_argument("--p", type=int, default=500)
        e.add_argument("--N", type=int, default=500, help="replicates per configuration")
        e.add_argument("--alpha", type=parse_float_range, default=[0.05])
        e.add_argument("--lag", type=int, default=1)
        e.add_argument("--seed", type=int, default=0)
        e.add_argument("--workers", type=int, default=1)
        e.add_argument("--noise", choices=NOISE_KINDS, default="gaussian")
        e.add_argument("--c", type=float, default=0.0)
        e.add_argument("--C", type=float, default=0.0)
        e.add_argument("--contaminate", type=parse_contamination)
        e.add_argument("--out", required=True, help="CSV table path (JSON written alongside)")
        if name == "power":
            e.add_argument("--sweep", type=parse_sweep, required=True, help="e.g. c=0:0.8:0.2")
        _add_common_test_args(e)
    return parser


def _scenario(args, seed):
    return ScenarioSpec(
        kind=args.scenario, T=args.T, p=args.p, c=args.c, C=args.C, noise=args.noise,
        contamination=args.contaminate, seed=seed, **({"burn_in": args.burn_in} if hasattr(args, "burn_in") else {}),
    )


def cmd_test(args):
    results = run_data_test(
        args.csv, lags=args.lags, grid=_grid(args), alphas=args.alpha, M=args.mc, seed=args.seed,
        bandwidth=args.bandwidth, use_log_returns=args.log_returns, has_header=args.header,
    )
    print(format_results_table(results))
    if args.out:
        Path(args.out).write_text(json.dumps([r.to_dict() for r in results], indent=2, sort_keys=True) + "\n")


def cmd_simulate(args):
    spec = _scenario(args, args.seed)
    m = generate(spec)
    out = Path(args.out)
    save_csv(m, out)
    sidecar = out.with_suffix(".json")
    sidecar.write_text(json.dumps(spec.to_dict(), indent=2, sort_keys=True) + "\n")
    print(f"wrote {m.T}x{m.p} curves to {out} (spec in {sidecar})")


def _experiment(args):
    sweep = getattr(args, "sweep", None)
    return ExperimentSpec(
        scenario=_scenario(args, args.seed),
        replicates=args.N,
        alphas=tuple(args.alpha),
        lag=args.lag,
        grid=_grid(args),
        M=args.mc,
        base_seed=args.seed,
        parallelism=args.workers,
        param_sweep=sweep,
        bandwidth=args.bandwidth,
    )


def _write_report(report, out):
    out = Path(out)
    out.write_text(report.to_csv())
    out.with_suffix(".json").write_text(report.to_json() + "\n")
    return out


def cmd_size(args):
    report = run_size(_experiment(args))
    out = _write_report(report, args.out)
    sys.stdout.write(report.to_csv())
    print(f"wrote {out}")


def cmd_power(args):
    report = run_power(_experiment(args))
    out = _write_report(report, args.out)
    for a in report.spec.alphas:
        out.with_name(f"{out.stem}_alpha{a:g}.dat").write_text(report.gnuplot(a))
    sys.stdout.write(report.to_csv())
    print(f"wrote {out}")


COMMANDS = {"test": cmd_test, "simulate": cmd_simulate, "size": cmd_size, "power": cmd_power}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        parser.error(str(exc))
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except (ValidationError, DegenerateCellError, UsageError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return 0


if __name__ == "__main__":
    sys.exit(main())

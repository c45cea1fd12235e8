"""Command line entry point.

Exit codes: 0 success, 2 configuration error, 3 numerical failure. A test
decision is data, so ``gof-test`` exits 0 whether it rejects or not.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .errors import ConfigError, DeconvError, NumericalError
from .experiments import PRESETS, ExperimentConfig, load_config, preset, run_experiment
from .functional import EstimationSetup, estimate_d
from .gof import TestSetup, calibrate, gof_test
from .models import (SmoothnessClass, density_from_json, noise_from_json, observe,
                     read_data_file, write_data_file)
from .spectral import DEFAULT_GRID_COUNT

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3

_STUDY_COMMANDS = {"power-study": "level_power", "mse-study": "mse", "rate-study": "rate",
                   "normality-check": "normality"}


class _Failure(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def parse_class(text: str) -> SmoothnessClass:
    """``sobolev:beta=1,L=1`` or ``supersmooth:alpha=1,r=2,L=1``."""
    tag, _, rest = text.partition(":")
    params = {}
    for item in filter(None, (p.strip() for p in rest.split(","))):
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"field 'class': expected key=value, got {item!r}")
        try:
            params[key.strip()] = float(value)
        except ValueError:
            raise ConfigError(f"field 'class': {key.strip()} must be a number (got {value!r})") from None
    return SmoothnessClass.from_dict({"tag": tag.strip(), **params})


_DESTS = {"class": "cls"}


def _require(args, *names):
    for name in names:
        if getattr(args, _DESTS.get(name, name.replace("-", "_"))) is None:
            raise ConfigError(f"field '{name}': --{name} is required for {args.command}")


def _write_json(path, payload):
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def _cmd_estimate(args):
    _require(args, "data", "noise")
    sample = read_data_file(args.data)
    noise = noise_from_json(args.noise)
    setup = None
    if args.cls is not None:
        setup = EstimationSetup(parse_class(args.cls), noise.smoothness)
    elif args.h is None:
        raise ConfigError("field 'class': pass --class or an explicit --h")
    res = _numerical("estimate_d", estimate_d, sample, noise, args.kernel, args.h,
                     args.grid_count, setup)
    print(f"d_n = {res.d_n!r}")
    print(f"h = {res.h!r}")
    print(f"regime = {res.regime or 'unspecified'}")
    if args.out:
        _write_json(args.out, {"d_n": res.d_n, "h": res.h, "n": res.n, "kernel": res.kernel,
                               "regime": res.regime, "bias_bound": res.bias_bound,
                               "variance_proxy": res.variance_proxy})


def _test_setup(args) -> TestSetup:
    _require(args, "null", "noise", "class")
    return TestSetup(density_from_json(args.null), noise_from_json(args.noise),
                     parse_class(args.cls), args.level)


def _cmd_gof_test(args):
    _require(args, "data")
    sample = read_data_file(args.data).require(2)
    setup = _test_setup(args)
    if args.c_star is None:
        _require(args, "seed")
    out = _numerical("test_statistic", gof_test, sample, setup, args.kernel, args.h, None,
                     args.c_star, args.B, args.seed, args.grid_count, args.jobs)
    print(f"T = {out.T!r}")
    print(f"threshold = {out.threshold!r}")
    print(f"decision = {'reject' if out.reject else 'accept'}")
    print(f"h = {out.h!r}")
    print(f"t_n = {out.t_n!r}")
    print(f"C* = {out.c_star!r}")
    if args.out:
        _write_json(args.out, out.to_dict())


def _cmd_calibrate(args):
    _require(args, "n", "seed")
    setup = _test_setup(args)
    cal = _numerical("calibrate", calibrate, setup, args.n, args.B, args.seed, args.kernel,
                     args.h, None, args.grid_count, args.jobs)
    print(f"C* = {cal.c_star!r}")
    print(f"h = {cal.h!r}")
    print(f"t_n = {cal.t_n!r}")
    print(f"B = {cal.B}, quantile level = {cal.quantile_level!r}")
    if args.out:
        _write_json(args.out, {"c_star": cal.c_star, "h": cal.h, "t_n": cal.t_n, "B": cal.B,
                               "seed": cal.seed, "quantile_level": cal.quantile_level,
                               "n": args.n, "level": args.level})


def _cmd_simulate(args):
    _require(args, "signal", "noise", "n", "seed", "out")
    signal = density_from_json(args.signal)
    noise = noise_from_json(args.noise)
    sample = observe(signal, noise, args.n, args.seed)
    header = f"n = {args.n}, seed = {args.seed}\nsignal = {args.signal}\nnoise = {args.noise}"
    write_data_file(args.out, sample.values, header)
    print(f"wrote {sample.n} observations to {args.out}")


def _study_config(args) -> ExperimentConfig:
    _require(args, "seed")
    study = _STUDY_COMMANDS[args.command]
    overrides = dict(seed=args.seed, level=args.level_override, kernel=args.kernel_override,
                     n=args.n, N=args.N, B=args.B_override, study=study)
    if args.config is not None:
        if _is_preset_ref(args.config):
            return preset(args.config, **overrides)
        return load_config(args.config, **overrides)
    if args.preset is not None:
        return preset(args.preset, **overrides)
    raise ConfigError("field 'config': pass --config FILE|JSON or --preset NAME")


def _is_preset_ref(text: str) -> bool:
    return text in PRESETS


def _cmd_study(args):
    cfg = _study_config(args)
    report = _numerical(args.command, run_experiment, cfg, args.jobs)
    if args.out:
        report.write_csv(args.out)
        summary_path = args.summary or str(Path(args.out).with_suffix(".json"))
        report.write_json(summary_path)
        print(f"wrote {len(report.records)} rows to {args.out} and the summary to {summary_path}")
    if args.verbose or not args.out:
        print(report.json_text(include_runtime=True), end="")
    else:
        _print_headline(report)


def _print_headline(report):
    s = report.summary
    if report.config.study == "level_power":
        for row in s["per_alternative"]:
            lo, hi = row["ci"]
            print(f"i={row['i']}: rejection rate {row['rate']:.3f} [{lo:.3f}, {hi:.3f}]")
    elif report.config.study == "mse":
        for row in s["per_alternative"]:
            print(f"i={row['i']}: MSE {row['mse']:.3e} [{row['ci'][0]:.3e}, {row['ci'][1]:.3e}]")
    elif report.config.study == "rate":
        lo, hi = s["slope_ci"]
        print(f"slope {s['slope']:.4f} [{lo:.4f}, {hi:.4f}], target {s['target_slope']}")
    else:
        print(f"KS distance {s['ks_distance']:.4f}, mean {s['mean']:.4f}, variance {s['variance']:.4f}")


def _numerical(operation, fn, *a):
    try:
        return fn(*a)
    except NumericalError as exc:
        raise _Failure(EXIT_NUMERICAL, f"numerical failure in {operation}: {exc}") from None


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="deconvgof", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def common(p, level=True):
        p.add_argument("--kernel", choices=["sinc", "trapezoid"], default="trapezoid")
        p.add_argument("--grid-count", type=int, default=DEFAULT_GRID_COUNT,
                       help="frequency nodes (even)")
        p.add_argument("--seed", type=int)
        p.add_argument("--out")
        p.add_argument("--jobs", type=int, help="worker processes (default: $DECONV_JOBS or 1)")
        p.add_argument("-v", "--verbose", action="store_true")
        if level:
            p.add_argument("--level", type=float, default=0.05)

    p = sub.add_parser("estimate", help="estimate the squared L2 norm of the signal density")
    p.add_argument("--data")
    p.add_argument("--noise", help="noise descriptor (JSON or path)")
    p.add_argument("--class", dest="cls", help="e.g. sobolev:beta=1,L=1")
    p.add_argument("--h", type=float)
    common(p, level=False)

    for name, helptext in (("gof-test", "L2 goodness-of-fit test of a simple null"),
                           ("calibrate", "bootstrap the threshold constant C*")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--data")
        p.add_argument("--null", help="null density descriptor (JSON or path)")
        p.add_argument("--noise")
        p.add_argument("--class", dest="cls")
        p.add_argument("--h", type=float)
        p.add_argument("--n", type=int, help="sample size to calibrate for")
        p.add_argument("--B", type=int, default=500, help="bootstrap replicates")
        p.add_argument("--c-star", type=float, help="skip calibration and use this constant")
        common(p)

    p = sub.add_parser("simulate", help="draw noisy observations to a data file")
    p.add_argument("--signal", help="signal density descriptor (JSON or path)")
    p.add_argument("--noise")
    p.add_argument("--n", type=int)
    common(p, level=False)

    for name in _STUDY_COMMANDS:
        p = sub.add_parser(name, help=f"Monte Carlo {name.replace('-', ' ')}")
        p.add_argument("--config", help="experiment config (JSON, path, or preset name)")
        p.add_argument("--preset", choices=PRESETS)
        p.add_argument("--summary", help="summary JSON path (default: --out with .json)")
        p.add_argument("--n", type=int)
        p.add_argument("--N", type=int, help="replicates")
        p.add_argument("--B", dest="B_override", type=int, help="calibration replicates")
        p.add_argument("--level", dest="level_override", type=float)
        p.add_argument("--kernel", dest="kernel_override", choices=["sinc", "trapezoid"])
        p.add_argument("--seed", type=int)
        p.add_argument("--out")
        p.add_argument("--jobs", type=int)
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


_HANDLERS = {"estimate": _cmd_estimate, "gof-test": _cmd_gof_test, "calibrate": _cmd_calibrate,
             "simulate": _cmd_simulate, **{k: _cmd_study for k in _STUDY_COMMANDS}}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _HANDLERS[args.command](args)
    except _Failure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except NumericalError as exc:
        print(f"error: numerical failure in {args.command}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (DeconvError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

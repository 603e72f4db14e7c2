"""Command-line entry point: ``qcs run | slope | plot | diagnose``.

Exit codes: 0 success, 2 configuration/usage error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from .. import diagnostics
from ..errors import ConfigError, InvalidParameterError, NumericalError, QCSError, ShapeError
from ..quantizer import Dithering, QuantizerConfig, dither_expectation_check
from ..sensing import KINDS, new_operator
from .analysis import DEFAULT_GROUP, emit_plot, fit_loglog_slope
from .config import ExperimentConfig
from .runner import COLUMNS, read_records, run_experiment

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


def _cmd_run(args):
    cfg = ExperimentConfig.load(args.config)
    out = args.out or cfg.output
    if not out:
        raise ConfigError("no output path: pass --out or set 'output' in the config")
    result = run_experiment(cfg, out, threads=args.threads)
    print(f"wrote {len(result.records)} rows to {result.path}")
    if result.audits is not None:
        held = sum(a.holds for a in result.audits)
        print(f"bound held in {held}/{len(result.audits)} trials (sampled distortions are lower bounds)")


def _cmd_slope(args):
    records = read_records(args.input)
    group_by = tuple(args.group_by.split(",")) if args.group_by else DEFAULT_GROUP
    bad = set(group_by) - set(COLUMNS)
    if bad:
        raise ConfigError(f"unknown group columns {sorted(bad)}")
    fits = fit_loglog_slope(records, group_by, args.x, args.x_min, args.x_max)
    print("\t".join(list(group_by) + ["slope", "intercept", "r2", "mean_slope", "points"]))
    for group, fit in fits.items():
        cells = [str(g) for g in group]
        if fit.degenerate:
            cells += ["undefined", "-", "-", "-", str(fit.points)]
        else:
            cells += [f"{fit.slope:.4f}", f"{fit.intercept:.4f}", f"{fit.r2:.4f}",
                      f"{fit.mean_slope:.4f}", str(fit.points)]
        print("\t".join(cells))


def _cmd_plot(args):
    result = emit_plot(read_records(args.input), args.out, args.style)
    print(f"wrote {result.figure} ({result.curves} curves) and {result.sidecar}")


def _operator(args):
    return new_operator(args.sensing, args.m, args.n, args.seed)


def _cmd_diagnose(args):
    if args.what == "rip":
        op = _operator(args)
        report = diagnostics.rip_distortion_estimate(
            op, diagnostics.SparseSampler(args.n, args.sparsity), args.samples, args.seed)
    elif args.what == "lpd":
        op = _operator(args)
        cfg = QuantizerConfig(args.delta, Dithering.NONE if args.no_dither else Dithering.UNIFORM)
        pairs = diagnostics.PairSampler(diagnostics.SparseSampler(args.n, args.sparsity))
        report = diagnostics.lpd_distortion_estimate(
            op, cfg, pairs, args.samples, args.fresh_dither, args.seed)
    elif args.what == "dither":
        mean = dither_expectation_check(args.a, args.delta, args.samples, args.seed)
        band = 2 * args.delta / np.sqrt(args.samples)
        print(json.dumps({"a": args.a, "delta": args.delta, "samples": args.samples,
                          "mean": mean, "band": band, "within_band": bool(abs(mean - args.a) <= band)}))
        return
    else:
        width = diagnostics.mean_width_sparse(args.n, args.sparsity, args.samples, args.seed)
        print(json.dumps({"n": args.n, "k": args.sparsity, "samples": args.samples,
                          "mean_width": width, "mean_width_sq": width**2}))
        return
    print(json.dumps({"kind": report.kind, "max_distortion": report.max_distortion,
                      "samples": report.sample_count, "sampler": report.sampler_tag,
                      "operator": report.operator, "note": "empirical maximum: a lower bound"}))


def build_parser():
    p = argparse.ArgumentParser(prog="qcs", description="Quantized compressive sensing laboratory")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a Monte-Carlo experiment from a config file")
    run.add_argument("--config", required=True)
    run.add_argument("--out")
    run.add_argument("--threads", type=int, default=1)
    run.set_defaults(func=_cmd_run)

    slope = sub.add_parser("slope", help="fit log-log slopes of median error")
    slope.add_argument("--in", dest="input", required=True)
    slope.add_argument("--group-by", help="comma-separated columns (default set,sensing,delta,dithered)")
    slope.add_argument("--x", choices=("m", "delta"), default="m")
    slope.add_argument("--x-min", type=float)
    slope.add_argument("--x-max", type=float)
    slope.set_defaults(func=_cmd_slope)

    plot = sub.add_parser("plot", help="log-log error plot with data sidecar")
    plot.add_argument("--in", dest="input", required=True)
    plot.add_argument("--out", required=True)
    plot.add_argument("--style", choices=("auto", "m", "delta"), default="auto")
    plot.set_defaults(func=_cmd_plot)

    diag = sub.add_parser("diagnose", help="sampled RIP/LPD distortions, dither mean, mean width")
    diag.add_argument("what", choices=("rip", "lpd", "dither", "width"))
    diag.add_argument("--sensing", choices=KINDS, default="gaussian")
    diag.add_argument("--m", type=int, default=256)
    diag.add_argument("--n", type=int, default=512)
    diag.add_argument("--sparsity", type=int, default=8)
    diag.add_argument("--samples", type=int, default=1000)
    diag.add_argument("--delta", type=float, default=1.0)
    diag.add_argument("--a", type=float, default=0.37)
    diag.add_argument("--fresh-dither", action="store_true")
    diag.add_argument("--no-dither", action="store_true")
    diag.add_argument("--seed", type=int, default=0)
    diag.set_defaults(func=_cmd_diagnose)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (ConfigError, InvalidParameterError, ShapeError, OSError) as exc:
        print(f"qcs: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"qcs: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except QCSError as exc:
        print(f"qcs: error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

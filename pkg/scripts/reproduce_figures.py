#!/usr/bin/env python3
"""Run the shipped experiment presets, then write CSVs, figures and slope tables.

    python scripts/reproduce_figures.py                  # every preset except 64x64 low-rank
    python scripts/reproduce_figures.py decay_sparse delta   # presets whose name starts with these
    python scripts/reproduce_figures.py --all --threads 4
"""
from __future__ import annotations

import argparse
import time
from pathlib import Path

from qcs.harness import ExperimentConfig, emit_plot, fit_loglog_slope, run_experiment
from qcs.harness.analysis import upper_half

ROOT = Path(__file__).resolve().parent.parent
SLOW = {"decay_lowrank_64"}


def report(name, cfg, result, seconds):
    print(f"== {name}: {len(result.records)} trials in {seconds:.1f}s -> {result.path}")
    if result.audits is not None:
        held = sum(a.holds for a in result.audits)
        print(f"   bound held in {held}/{len(result.audits)} trials")
        return
    if len(cfg.m_grid) >= 3:
        fits = fit_loglog_slope(result.records)
        upper = fit_loglog_slope(result.records, x_min=upper_half(cfg.m_grid))
        for group, fit in fits.items():
            tail = upper[group].slope if len(cfg.m_grid) >= 6 else float("nan")
            print(f"   {group}: slope {fit.slope:+.3f} (r2 {fit.r2:.3f}, mean-based {fit.mean_slope:+.3f}),"
                  f" upper-half slope {tail:+.3f}")
    elif len(cfg.deltas) >= 3:
        fits = fit_loglog_slope(result.records, group_by=("set", "sensing", "dithered"), x="delta")
        for group, fit in fits.items():
            print(f"   {group}: slope vs delta {fit.slope:+.3f}")


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("names", nargs="*", help="preset name prefixes (default: all fast presets)")
    p.add_argument("--all", action="store_true", help="include the 64x64 low-rank preset")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default=str(ROOT / "results"))
    args = p.parse_args(argv)

    out = Path(args.out)
    for path in sorted((ROOT / "configs").glob("*.cfg")):
        name = path.stem
        if args.names and not any(name.startswith(n) for n in args.names):
            continue
        if not args.names and not args.all and name in SLOW:
            continue
        cfg = ExperimentConfig.load(path)
        start = time.perf_counter()
        result = run_experiment(cfg, out / f"{name}.csv", threads=args.threads)
        report(name, cfg, result, time.perf_counter() - start)
        if result.audits is None:
            plot = emit_plot(result.records, out / f"{name}.svg")
            print(f"   figure {plot.figure}")


if __name__ == "__main__":
    main()

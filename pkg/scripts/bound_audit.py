#!/usr/bin/env python3
"""Audit the PBP error against the sampled distortion bound 2(eps + nu).

    python scripts/bound_audit.py                       # configs/audit_sparse.cfg
    python scripts/bound_audit.py configs/audit_lowrank.cfg --trials 10

eps and nu are empirical maxima over sampled directions in the span of x and
x_hat, so they underestimate the true distortions; a miss is reported, not
treated as a contradiction.
"""
from __future__ import annotations

import argparse
import logging
from dataclasses import replace
from pathlib import Path

import numpy as np

from qcs.harness import ExperimentConfig, run_experiment

ROOT = Path(__file__).resolve().parent.parent


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("config", nargs="?", default=str(ROOT / "configs" / "audit_sparse.cfg"))
    p.add_argument("--trials", type=int)
    p.add_argument("--samples", type=int, help="sampled directions per estimator")
    p.add_argument("--out")
    p.add_argument("-v", "--verbose", action="store_true", help="log each missed bound")
    args = p.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)

    cfg = ExperimentConfig.load(args.config)
    if cfg.experiment != "diagnose":
        p.error(f"{args.config} is not a 'diagnose' experiment")
    if args.trials:
        cfg = replace(cfg, trials=args.trials)
    if args.samples:
        cfg = replace(cfg, audit_samples=args.samples)
    res = run_experiment(cfg, args.out)
    margins = np.array([a.margin for a in res.audits])
    ratio = np.array([a.error / a.bound for a in res.audits])
    print(f"{cfg.experiment_id}: bound held in {int((margins >= 0).sum())}/{margins.size} trials")
    print(f"  error / bound: median {np.median(ratio):.3f}, max {ratio.max():.3f}")
    print(f"  eps_hat median {np.median([a.eps_hat for a in res.audits]):.4f}, "
          f"nu_hat median {np.median([a.nu_hat for a in res.audits]):.4f}")
    if res.path:
        print(f"  wrote {res.path} and {res.path.with_suffix('.audit.csv')}")


if __name__ == "__main__":
    main()

"""Aggregation over trials, log-log slope fits, and figure emission.

Medians (and means) are computed once in :func:`aggregate`; both the slope
fit and the plot sidecar read from that table.
"""
from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import InvalidParameterError

DEFAULT_GROUP = ("set", "sensing", "delta", "dithered")


@dataclass(frozen=True)
class AggregatePoint:
    group: tuple
    x: float
    median: float
    mean: float
    count: int


@dataclass(frozen=True)
class PlotResult:
    figure: Path
    sidecar: Path
    curves: int
    guides: int


@dataclass(frozen=True)
class SlopeFit:
    group: tuple
    slope: float
    intercept: float
    r2: float
    mean_slope: float
    mean_intercept: float
    mean_r2: float
    points: int
    degenerate: bool = False


def aggregate(records, group_by=DEFAULT_GROUP, x="m"):
    """Median and mean error per (group, x), ordered by group then x."""
    buckets = defaultdict(list)
    for r in records:
        key = tuple(getattr(r, g) for g in group_by)
        buckets[(key, getattr(r, x))].append(r.error)
    return [
        AggregatePoint(key, xv, float(np.median(errs)), float(np.mean(errs)), len(errs))
        for (key, xv), errs in sorted(buckets.items(), key=lambda kv: (repr(kv[0][0]), kv[0][1]))
    ]


def _ols(lx, ly):
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = np.sum((ly - ly.mean()) ** 2)
    r2 = 1.0 if ss_tot == 0 else 1.0 - np.sum(resid**2) / ss_tot
    return float(slope), float(intercept), float(r2)


def fit_points(points) -> SlopeFit:
    """OLS of log(median) (and log(mean)) against log(x) for one group's points."""
    group = points[0].group
    if len({p.x for p in points}) < 3:
        raise InvalidParameterError(f"group {group}: need >= 3 distinct x values")
    if any(p.median <= 0 or p.mean <= 0 for p in points):
        nan = math.nan
        return SlopeFit(group, nan, nan, nan, nan, nan, nan, len(points), degenerate=True)
    lx = np.log([p.x for p in points])
    slope, intercept, r2 = _ols(lx, np.log([p.median for p in points]))
    mslope, mintercept, mr2 = _ols(lx, np.log([p.mean for p in points]))
    return SlopeFit(group, slope, intercept, r2, mslope, mintercept, mr2, len(points))


def fit_loglog_slope(records, group_by=DEFAULT_GROUP, x="m", x_min=None, x_max=None):
    """Per-group log-log slope of the median error; returns {group: SlopeFit}."""
    by_group = defaultdict(list)
    for p in aggregate(records, group_by, x):
        if (x_min is None or p.x >= x_min) and (x_max is None or p.x <= x_max):
            by_group[p.group].append(p)
    return {g: fit_points(pts) for g, pts in by_group.items()}


def upper_half(grid):
    """Smallest x of the upper half of a grid (the middle point is included for odd sizes)."""
    grid = sorted(set(grid))
    return grid[len(grid) // 2]


def write_aggregate(points, path, group_by=DEFAULT_GROUP, x="m"):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(group_by) + [x, "median_error", "mean_error", "trials"])
        for p in points:
            # repr round-trips, so the sidecar holds exactly the values the fits use
            w.writerow(list(p.group) + [p.x, repr(p.median), repr(p.mean), p.count])


def _label(group, group_by):
    parts = []
    for name, value in zip(group_by, group):
        if name == "delta":
            parts.append(f"δ={value:g}")
        elif name == "dithered":
            parts.append("dithered" if value else "no dither")
        else:
            parts.append(str(value))
    return ", ".join(parts)


def emit_plot(records, out, style="auto", group_by=DEFAULT_GROUP):
    """Log-log error plot (vector format from ``out``'s suffix) plus a ``.data.csv`` sidecar.

    style ``m``: error vs m with m^-1/2 and m^-1 guides; ``delta``: error vs delta.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    records = list(records)
    if not records:
        raise InvalidParameterError("no records to plot")
    if style == "auto":
        style = "delta" if len({r.m for r in records}) == 1 and len({r.delta for r in records}) > 1 else "m"
    x = "m" if style == "m" else "delta"
    if x == "delta":
        group_by = tuple(g for g in group_by if g != "delta")
    points = aggregate(records, group_by, x)
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    sidecar = out.with_suffix(".data.csv")
    write_aggregate(points, sidecar, group_by, x)

    by_group = defaultdict(list)
    for p in points:
        by_group[p.group].append(p)
    fig, ax = plt.subplots(figsize=(5, 4))
    markers = "Dos^v<>"
    for i, (group, pts) in enumerate(by_group.items()):
        xs = [p.x for p in pts]
        ax.loglog(xs, [p.median for p in pts], marker=markers[i % len(markers)],
                  linestyle="-" if len(pts) > 1 else "none", label=_label(group, group_by))
    all_x = sorted({p.x for p in points})
    guides = 0
    if x == "m" and len(all_x) > 1:
        anchor = points[0]
        xs = np.array(all_x, dtype=float)
        for power, ls in ((0.5, "--"), (1.0, ":")):
            ax.loglog(xs, anchor.median * (xs / anchor.x) ** (-power), "k" + ls, linewidth=0.8,
                      label=f"m^-{power:g}")
            guides += 1
    ax.set_xlabel("m" if x == "m" else "δ")
    ax.set_ylabel("‖x − x̂‖ (median over trials)")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(out)
    plt.close(fig)
    return PlotResult(out, sidecar, len(by_group), guides)

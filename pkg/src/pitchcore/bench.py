# pitchcore/bench.py
"""
Complexity benchmark: a full lag sweep of each measure over seeded noise
windows of growing size, recording wall time and kernel operation counts.
Operation counts should grow as n^2 for all three measures.
"""
import logging
import statistics
import time
from dataclasses import dataclass
from typing import Dict, List, Sequence

import numpy as np

from .algorithms import CORE_MEASURES, MeasureKind, OpCounter, lag_curve
from .errors import DomainError
from .signal_core import Frame, LagRange, max_lag_for
from .signals import signals

logger = logging.getLogger("PitchCore")

BENCH_HEADER = "n,method,ops,seconds"
MIN_SIZES = 3


@dataclass(frozen=True)
class BenchPoint:
    n: int
    method: MeasureKind
    ops: int
    seconds: float


def sweep_ops(frame: Frame, measure: MeasureKind) -> int:
    """Operations for one sweep over every admissible lag 1 .. floor((n+1)/2)-2."""
    counter = OpCounter()
    lag_curve(frame, LagRange(1, max_lag_for(len(frame))), measure, counter=counter, strict=False)
    return counter.total


def run_bench(sizes: Sequence[int], reps: int = 3, seed: int = 0,
              measures: Sequence[MeasureKind] = CORE_MEASURES) -> List[BenchPoint]:
    """Times `reps` sweeps per (size, measure) and reports the median wall time."""
    if len(sizes) < MIN_SIZES:
        raise DomainError(f"Need at least {MIN_SIZES} window sizes to fit a slope, got {len(sizes)}.")
    if reps < 1:
        raise DomainError(f"reps must be at least 1, got {reps}.")
    if any(n < 5 for n in sizes):
        raise DomainError("Window sizes must be at least 5 samples.")

    rng = np.random.default_rng(seed)
    points: List[BenchPoint] = []
    for n in sorted(sizes):
        frame = Frame.from_values(rng.standard_normal(n))
        lags = LagRange(1, max_lag_for(n))
        for measure in measures:
            ops = sweep_ops(frame, measure)
            timings = []
            for _ in range(reps):
                started = time.perf_counter()
                lag_curve(frame, lags, measure, strict=False)
                timings.append(time.perf_counter() - started)
            point = BenchPoint(n, measure, ops, statistics.median(timings))
            logger.info("n=%d %s: %d ops, %.6f s", n, measure.value, ops, point.seconds)
            signals.bench_point.emit(n, measure.value, ops, point.seconds)
            points.append(point)
    return points


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of log(y) against log(x)."""
    slope, _ = np.polyfit(np.log(np.asarray(xs, dtype=float)), np.log(np.asarray(ys, dtype=float)), 1)
    return float(slope)


def fit_slopes(points: Sequence[BenchPoint], field: str = "ops") -> Dict[MeasureKind, float]:
    slopes = {}
    for measure in dict.fromkeys(point.method for point in points):
        chosen = [point for point in points if point.method is measure]
        slopes[measure] = loglog_slope([p.n for p in chosen], [getattr(p, field) for p in chosen])
    return slopes


def format_bench_csv(points: Sequence[BenchPoint]) -> str:
    lines = [BENCH_HEADER]
    lines += [f"{p.n},{p.method.value},{p.ops},{p.seconds:.9f}" for p in points]
    return "\n".join(lines) + "\n"

"""Timing harness: median solve time per size and the fitted log-log slope."""

from __future__ import annotations

import logging
import math
import statistics
import time
from dataclasses import dataclass

import numpy as np

from .costs import CostSpec
from .instances import InstanceSpec, gen_instance
from .matching import PointSet
from .oracles import nested_dp
from .pyramid import solve_matching

log = logging.getLogger(__name__)

CSV_HEADER = "n,median_ns,cells,slope_running"
# medians below this many timer ticks are not trusted
MIN_TICKS = 1000


@dataclass
class BenchRow:
    n: int
    median_ns: int
    cells: int
    slope_running: float
    nested_median_ns: int | None = None

    def csv(self) -> str:
        slope = "" if math.isnan(self.slope_running) else f"{self.slope_running:.4f}"
        return f"{self.n},{self.median_ns},{self.cells},{slope}"


def loglog_slope(ns, ts) -> float:
    """Least-squares slope of log(t) against log(n); NaN with fewer than two points."""
    if len(ns) < 2:
        return math.nan
    return float(np.polyfit(np.log(ns), np.log(ts), 1)[0])


def _time_ns(fn) -> int:
    t0 = time.perf_counter_ns()
    fn()
    return time.perf_counter_ns() - t0


def warm_up(cost: CostSpec, size: int = 512, rounds: int = 3):
    """Compile the kernels and warm caches so that the first timed call is not charged for it."""
    solve_matching(PointSet([0.0, 1.0, 1.1, 1.2, 3.0, 7.0]), cost)
    for k in range(rounds):
        solve_matching(gen_instance(InstanceSpec(size, seed=2 ** 63 + k)), cost)


def run_bench(sizes, reps: int, seed: int, cost: CostSpec, nested_cap: int = 1024,
              nested_reps: int | None = None) -> list[BenchRow]:
    """Time ``solve_matching`` (and ``nested_dp`` up to ``nested_cap`` points) per size.

    Repetition ``k`` at every size uses the uniform instance with seed
    ``seed + k``.
    """
    warm_up(cost)
    res_ns = time.get_clock_info("perf_counter").resolution * 1e9
    nested_reps = nested_reps or max(1, min(reps, 3))
    rows: list[BenchRow] = []
    for size in sizes:
        times, cells = [], 0
        instances = [gen_instance(InstanceSpec(size, seed=seed + k)) for k in range(reps)]
        for ps in instances:
            out = {}
            times.append(_time_ns(lambda: out.setdefault("r", solve_matching(ps, cost))))
            cells = max(cells, out["r"].cells_computed)
        med = int(statistics.median(times))
        if med < MIN_TICKS * max(res_ns, 1.0):
            log.warning("size %d: median %d ns is too close to timer resolution, skipped", size, med)
            continue
        nested_med = None
        if size <= nested_cap:
            nested_med = int(statistics.median(
                _time_ns(lambda: nested_dp(ps, cost)) for ps in instances[:nested_reps]))
        done = rows + [BenchRow(size, med, cells, math.nan)]
        slope = loglog_slope([r.n for r in done], [r.median_ns for r in done])
        rows.append(BenchRow(size, med, cells, slope, nested_med))
    return rows


def format_csv(rows) -> str:
    return "\n".join([CSV_HEADER] + [r.csv() for r in rows]) + "\n"

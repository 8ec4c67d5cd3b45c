"""Reference solvers used to check the pyramid solver.

``brute_force_min_matching`` assumes nothing about the structure of optimal
matchings. ``nested_dp`` assumes only that some optimal matching is nested and
minimises over the partner of the leftmost point of every interval, in cubic
time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .costs import CostSpec, eval_cost
from .errors import SizeError
from .matching import Matching, PointSet, matching_weight

BRUTE_FORCE_CAP = 14


@dataclass
class OracleResult:
    weight: float
    matching: Matching
    explored: int


def brute_force_min_matching(ps: PointSet, cost: CostSpec) -> OracleResult:
    """Enumerate all ``(2n-1)!!`` perfect matchings.

    The smallest unmatched index is paired with every remaining index in
    increasing order; the first minimiser met in that order is returned.
    """
    size = len(ps)
    if size > BRUTE_FORCE_CAP:
        raise SizeError(f"brute force is capped at {BRUTE_FORCE_CAP} points, got {size}")
    xs = ps.coords.tolist()
    d = [[eval_cost(cost, a, b) for b in xs] for a in xs]
    best_w = float("inf")
    best: list[tuple[int, int]] = []
    explored = 0
    pairs: list[tuple[int, int]] = []

    def rec(free: list[int], acc: float):
        nonlocal best_w, best, explored
        if not free:
            explored += 1
            if acc < best_w:
                best_w = acc
                best = list(pairs)
            return
        a = free[0]
        for k in range(1, len(free)):
            b = free[k]
            pairs.append((a, b))
            rec(free[1:k] + free[k + 1:], acc + d[a][b])
            pairs.pop()

    rec(list(range(size)), 0.0)
    m = Matching(best)
    return OracleResult(matching_weight(ps, cost, m), m, explored)


@dataclass
class NestedDPResult(OracleResult):
    table: np.ndarray  # table[i, j + 1] = optimal weight on points i..j; empty spans are 0

    def cell(self, i: int, j: int) -> float:
        return float(self.table[i, j + 1])


def nested_dp(ps: PointSet, cost: CostSpec) -> NestedDPResult:
    """Interval DP over nested matchings.

    ``M[i][j] = min_k d(x_i, x_k) + M[i+1][k-1] + M[k+1][j]`` over
    ``k = i+1, i+3, ..., j``; ties go to the smallest ``k``.
    """
    xs = ps.coords
    size = len(ps)
    # F[a, b] is the weight on points a..b-1 (half-open), F[a, a] = 0
    F = np.zeros((size + 1, size + 1))
    choice = np.zeros((size + 1, size + 1), dtype=np.int64)
    cells = 0
    for span in range(2, size + 1, 2):
        for i in range(0, size - span + 1):
            end = i + span  # exclusive
            ks = np.arange(i + 1, end, 2)
            cand = cost.g(np.abs(xs[ks] - xs[i])) + F[i + 1, ks] + F[ks + 1, end]
            best = int(np.argmin(cand))
            F[i, end] = cand[best]
            choice[i, end] = ks[best]
            cells += 1
    arcs = []
    stack = [(0, size)]
    while stack:
        i, end = stack.pop()
        if end <= i:
            continue
        k = int(choice[i, end])
        arcs.append((i, k))
        stack.append((i + 1, k))
        stack.append((k + 1, end))
    m = Matching(arcs)
    return NestedDPResult(matching_weight(ps, cost, m), m, cells, F)

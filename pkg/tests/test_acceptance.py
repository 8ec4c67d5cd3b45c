"""Acceptance criteria 1-9, each at its stated tolerance.

Every test records a one-line verdict that ``conftest.py`` prints in the
terminal summary. Instances are seeded so that a failure can be replayed.
"""

import math
import time

import numpy as np
import pytest
from conftest import random_points, record

from linematch import bench
from linematch.costs import make_power_cost
from linematch.matching import (Matching, PointSet, check_parity, classify_arcs,
                                count_crossings, crossing_pairs, is_nested, matching_weight,
                                uncross)
from linematch.oracles import brute_force_min_matching, nested_dp
from linematch.pyramid import solve_full_table, solve_matching
from linematch.verify import bellman_failures, stabilization_failures

REL = 1e-9
ALPHAS = (0.3, 0.5, 0.7, 0.9)

# instances solved in criteria 1 and 2, re-examined by criterion 3
SOLVED: list[tuple[str, PointSet, object]] = []


def close(a, b, rel=REL):
    return math.isclose(a, b, rel_tol=rel, abs_tol=1e-12)


def test_criterion_1_brute_force_equivalence():
    rng = np.random.default_rng(1001)
    sizes = (2, 4, 6, 8, 10, 12)
    t0 = time.perf_counter()
    bad = []
    for k in range(500):
        size, alpha = sizes[k % 6], ALPHAS[(k // 6) % 4]
        cost = make_power_cost(alpha)
        ps = random_points(rng, size)
        res = solve_matching(ps, cost)
        SOLVED.append(("c1", ps, res))
        bf = brute_force_min_matching(ps, cost)
        if not close(res.total_weight, bf.weight):
            bad.append((k, res.total_weight, bf.weight))
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 30
    record(1, ok, f"500 instances, {len(bad)} weight mismatches, {elapsed:.1f} s (limit 30 s)")
    assert not bad, bad[:3]
    assert elapsed < 30


def test_criterion_2_cellwise_nested_dp():
    rng = np.random.default_rng(2002)
    t0 = time.perf_counter()
    bad, cells = [], 0
    for k in range(100):
        size = 2 * (1 + k % 30)
        cost = make_power_cost(ALPHAS[k % 4])
        ps = random_points(rng, size)
        table = solve_full_table(ps, cost)
        dp = nested_dp(ps, cost)
        for i, j, v, _ in table.cells():
            cells += 1
            if not close(v, dp.cell(i, j)):
                bad.append((k, i, j, v, dp.cell(i, j)))
        SOLVED.append(("c2", ps, solve_matching(ps, cost)))
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 60
    record(2, ok, f"100 instances up to 60 points, {cells} cells, {len(bad)} mismatches, "
                  f"{elapsed:.1f} s (limit 60 s)")
    assert not bad, bad[:3]
    assert elapsed < 60


def test_criterion_3_structure():
    if len(SOLVED) < 600:
        pytest.skip("needs criteria 1 and 2 to have run in this session")
    bad = [(tag, ps.coords.tolist()) for tag, ps, res in SOLVED
           if not (res.matching.is_perfect(len(ps)) and is_nested(res.matching)
                   and check_parity(res.matching))]
    record(3, not bad, f"{len(SOLVED)} solved instances, {len(bad)} structural failures")
    assert not bad, bad[:3]


def _random_perfect(rng, size):
    perm = rng.permutation(size)
    return Matching([(int(perm[2 * k]), int(perm[2 * k + 1])) for k in range(size // 2)])


def _uncrossing_survey():
    rng = np.random.default_rng(4004)
    cost = make_power_cost(0.5)
    pairs = exact = weight_ok = law_ok = 0
    counterexample = None
    for _ in range(200):
        size = 2 * int(rng.integers(2, 11))
        ps = random_points(rng, size)
        m = _random_perfect(rng, size)
        before_c, before_w = count_crossings(m), matching_weight(ps, cost, m)
        for a, b in crossing_pairs(m):
            u = uncross(m, a, b)
            pairs += 1
            drop = before_c - count_crossings(u)
            (p, r), (q, s) = sorted((a, b))
            straddling = sum(1 for c in m.arcs if p < c.i < q and r < c.j < s)
            law_ok += drop == 1 + 2 * straddling
            if drop == 1:
                exact += 1
            elif counterexample is None:
                counterexample = (m.to_json(), tuple(a), tuple(b), drop)
            weight_ok += matching_weight(ps, cost, u) < before_w
    return pairs, exact, weight_ok, law_ok, counterexample


SURVEY = {}


def _survey():
    if not SURVEY:
        SURVEY["v"] = _uncrossing_survey()
    return SURVEY["v"]


def test_criterion_4_uncrossing_weight_descent():
    pairs, exact, weight_ok, law_ok, _ = _survey()
    assert pairs > 0 and weight_ok == pairs
    # what does hold: the count drops by 1 plus twice the arcs spanning exactly the two inner endpoints
    assert law_ok == pairs


@pytest.mark.xfail(strict=True, reason="a third arc with exactly the two inner endpoints inside it "
                                        "crosses both old arcs and neither new one, so the count "
                                        "drops by 3 or more; see test_matching.py drop-law test")
def test_criterion_4_exact_crossing_decrement():
    pairs, exact, weight_ok, law_ok, cex = _survey()
    ok = exact == pairs and weight_ok == pairs
    record(4, ok, f"{pairs} crossing pairs in 200 matchings: weight strictly decreased on "
                  f"{weight_ok}, crossings dropped by exactly 1 on {exact} only "
                  f"(first counterexample {cex}); drop = 1 + 2k held on {law_ok}")
    assert exact == pairs


def test_criterion_5_bellman():
    rng = np.random.default_rng(5005)
    bad, subsets = [], 0
    for k in range(100):
        size = 2 * int(rng.integers(1, 16))
        cost = make_power_cost(ALPHAS[k % 4])
        ps = random_points(rng, size)
        m = solve_matching(ps, cost).matching
        subsets += len(m) if len(m) > 1 else 0
        fails = bellman_failures(ps, cost, m, rel=REL)
        if fails:
            bad.append((k, fails))
    record(5, not bad, f"100 instances, {subsets} single-arc deletions, {len(bad)} failures")
    assert not bad, bad[:3]


def test_criterion_6_stabilization():
    rng = np.random.default_rng(6006)
    cost = make_power_cost(0.5)
    bad, regenerated, hidden = [], 0, 0
    done = 0
    while done < 200:
        a, b = 2 * int(rng.integers(1, 11)), 2 * int(rng.integers(1, 11))
        xs = np.sort(rng.uniform(0.0, 10.0, a))
        ys = np.sort(rng.uniform(0.0, 10.0, b)) + xs[-1] + rng.uniform(0.01, 2.0)
        left, right = PointSet(xs), PointSet(ys)
        joint = PointSet(np.concatenate([xs, ys]))
        if min(solve_full_table(p, cost).min_margin() for p in (left, right, joint)) < 1e-7:
            regenerated += 1
            continue
        done += 1
        for p in (left, right):
            hidden += len(classify_arcs(solve_matching(p, cost).matching).hidden)
        fails = stabilization_failures(left, right, cost)
        if fails:
            bad.append((xs.tolist(), ys.tolist(), fails))
    record(6, not bad and hidden > 0,
           f"200 pairs ({regenerated} near-tie pairs regenerated), {hidden} hidden arcs checked, "
           f"{len(bad)} failures")
    assert hidden > 0
    assert not bad, bad[:1]


def test_criterion_7_worked_fixtures(sqrt_cost):
    split = solve_matching(PointSet([0.0, 4.9, 5.1, 10.0]), sqrt_cost)
    even = solve_matching(PointSet([0.0, 1.0, 2.0, 3.0]), sqrt_cost)
    # brute force over the three matchings gives sqrt(10) + sqrt(0.2)
    checks = [
        split.matching == Matching([(0, 3), (1, 2)]),
        math.isclose(split.total_weight, 3.6094912556683373, rel_tol=1e-15),
        split.reductions == 1,
        even.matching == Matching([(0, 1), (2, 3)]),
        even.total_weight == 2.0,
        even.reductions == 0,
    ]
    record(7, all(checks), f"split instance weight {split.total_weight!r}, 1 event; "
                           f"even instance weight {even.total_weight!r}, 0 events")
    assert all(checks), checks


def test_criterion_8_invariance():
    rng = np.random.default_rng(8008)
    worst_shift = worst_scale = 0.0
    cases = 0
    for k in range(40):
        alpha = ALPHAS[k % 4]
        cost = make_power_cost(alpha)
        ps = random_points(rng, 2 * int(rng.integers(1, 21)))
        base = solve_full_table(ps, cost)
        vals = np.array([v for _, _, v, _ in base.cells()])
        for t in (-1000.0, 3.7):
            moved = np.array([v for _, _, v, _ in solve_full_table(ps.shifted(t), cost).cells()])
            worst_shift = max(worst_shift, float(np.max(np.abs(moved - vals) / np.maximum(1.0, np.abs(vals)))))
            cases += 1
        w = solve_matching(ps, cost).total_weight
        for s in (0.01, 100.0):
            ws = solve_matching(ps.scaled(s), cost).total_weight
            worst_scale = max(worst_scale, abs(ws - s ** alpha * w) / (s ** alpha * w))
            cases += 1
    ok = worst_shift <= 1e-9 and worst_scale <= 1e-9
    record(8, ok, f"{cases} transformed instances, worst shift deviation {worst_shift:.2e} per unit weight, "
                  f"worst scaling deviation {worst_scale:.2e} relative (limits 1e-9)")
    assert worst_shift <= 1e-9
    assert worst_scale <= 1e-9


BENCH_SIZES = [2 ** k for k in range(8, 14)]
NESTED_CAP = 1024


def test_criterion_9_complexity():
    t0 = time.perf_counter()
    rows = bench.run_bench(BENCH_SIZES, reps=9, seed=9009, cost=make_power_cost(0.5),
                           nested_cap=NESTED_CAP, nested_reps=3)
    elapsed = time.perf_counter() - t0
    assert [r.n for r in rows] == BENCH_SIZES, "a size was skipped for timer resolution"
    slope = bench.loglog_slope([r.n for r in rows], [r.median_ns for r in rows])
    # nested_dp does strictly more work as n grows, so its time at the cap bounds it from below beyond
    nested = {r.n: r.nested_median_ns for r in rows if r.nested_median_ns is not None}
    floor = nested[NESTED_CAP]
    faster = all(r.median_ns < nested.get(r.n, floor) for r in rows if r.n >= 512)
    cells_ok = all(r.cells <= (r.n // 2) * (r.n - 1) for r in rows)
    ok = 1.7 <= slope <= 2.4 and faster and cells_ok and elapsed < 300
    table = ", ".join(f"{r.n}:{r.median_ns / 1e6:.1f}ms" for r in rows)
    record(9, ok, f"slope {slope:.3f} (band [1.7, 2.4]); solve {table}; nested_dp "
                  + ", ".join(f"{n}:{v / 1e6:.0f}ms" for n, v in nested.items())
                  + f"; bench {elapsed:.0f} s (limit 300 s)")
    assert 1.7 <= slope <= 2.4
    assert faster
    assert cells_ok
    assert elapsed < 300

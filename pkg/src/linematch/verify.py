"""Executable property checks: oracle agreement, structure, Bellman, stabilization.

Each check returns a :class:`CheckResult`; ``run_checks`` bundles the suite the
``check`` command runs on one instance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .costs import CostSpec, eval_cost, validate_concavity
from .errors import InputError
from .matching import (Arc, Matching, PointSet, check_parity, classify_arcs,
                       is_nested)
from .oracles import brute_force_min_matching, nested_dp
from . import pyramid

REL_TOL = 1e-9
BRUTE_FORCE_AUTO_CAP = 12


def close(a: float, b: float, rel: float = REL_TOL, abs_: float = 1e-12) -> bool:
    return math.isclose(a, b, rel_tol=rel, abs_tol=abs_)


@dataclass
class CheckResult:
    name: str
    status: str  # "pass", "fail" or "skipped"
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.status != "fail"

    def line(self) -> str:
        tag = {"pass": "PASS", "fail": "FAIL", "skipped": "SKIP"}[self.status]
        return f"[{tag}] {self.name}" + (f": {self.detail}" if self.detail else "")


def _verdict(name, ok, detail=""):
    return CheckResult(name, "pass" if ok else "fail", detail)


def bellman_failures(ps: PointSet, cost: CostSpec, m: Matching, rel: float = REL_TOL) -> list[Arc]:
    """Arcs whose deletion leaves a sub-matching that re-solves to a different weight."""
    bad = []
    arcs = m.arcs
    if len(arcs) < 2:
        return bad
    for drop in arcs:
        keep = [a for a in arcs if a != drop]
        idx = sorted(v for a in keep for v in a)
        sub = ps.subset(idx)
        want = math.fsum(eval_cost(cost, ps[a.i], ps[a.j]) for a in keep)
        got = pyramid.solve_matching(sub, cost).total_weight
        if not close(got, want, rel):
            bad.append(drop)
    return bad


def stabilization_failures(left: PointSet, right: PointSet, cost: CostSpec) -> list[tuple[str, Arc]]:
    """Hidden arcs of the two partial matchings that are missing or exposed in the joint one.

    ``left`` must lie entirely to the left of ``right``. Arcs are reported in
    joint indexing, tagged ``"left"`` or ``"right"``.
    """
    if left.coords[-1] >= right.coords[0]:
        raise InputError("left block must lie strictly to the left of the right block")
    joint = PointSet(list(left) + list(right))
    shift = len(left)
    jm = pyramid.solve_matching(joint, cost).matching
    jclass = classify_arcs(jm)
    present = set(jm.arcs)
    bad = []
    for tag, block, off in (("left", left, 0), ("right", right, shift)):
        pm = pyramid.solve_matching(block, cost).matching
        for a in classify_arcs(pm).hidden:
            moved = Arc(a.i + off, a.j + off)
            if moved not in present or moved not in jclass.hidden:
                bad.append((tag, moved))
    return bad


def run_checks(ps: PointSet, cost: CostSpec, splits=()) -> list[CheckResult]:
    out: list[CheckResult] = []
    size = len(ps)
    res = pyramid.solve_matching(ps, cost)
    w = res.total_weight
    m = res.matching

    if size <= BRUTE_FORCE_AUTO_CAP:
        bf = brute_force_min_matching(ps, cost)
        out.append(_verdict("oracle-weight", close(w, bf.weight),
                            f"solver {w!r} vs brute force {bf.weight!r} ({bf.explored} matchings)"))
    else:
        out.append(CheckResult("oracle-weight", "skipped", f"skipped (size cap: {size} > {BRUTE_FORCE_AUTO_CAP} points)"))

    dp = nested_dp(ps, cost)
    out.append(_verdict("nested-dp-weight", close(w, dp.weight), f"solver {w!r} vs nested DP {dp.weight!r}"))

    table = pyramid.solve_full_table(ps, cost)
    worst = None
    for i, j, v, _ in table.cells():
        if not close(v, dp.cell(i, j)):
            worst = (i, j, v, dp.cell(i, j))
            break
    out.append(_verdict("table-cells", worst is None,
                        "" if worst is None else "cell (%d, %d): %r vs %r" % worst))
    out.append(_verdict("mode-agreement", close(table.top, w), f"full table {table.top!r} vs reduction {w!r}"))

    out.append(_verdict("perfect", m.is_perfect(size)))
    out.append(_verdict("nested", is_nested(m)))
    out.append(_verdict("parity", check_parity(m)))

    bad = bellman_failures(ps, cost, m)
    out.append(_verdict("bellman", not bad, f"{len(m)} single-arc deletions"
                        + (f", failing arcs {[tuple(a) for a in bad]}" if bad else "")))

    strict = validate_concavity(cost).strict if splits else True
    for x in splits:
        name = f"stabilization@{x!r}"
        k = int((ps.coords < x).sum())
        if k == 0 or k == size or k % 2 or (ps.coords == x).any():
            raise InputError(f"split {x!r} must leave an even, nonempty block on each side")
        if not strict:
            # optimal matchings need not be unique, so the property is not expected to hold
            out.append(CheckResult(name, "skipped", "skipped (cost not strictly concave)"))
            continue
        bad = stabilization_failures(ps.subset(range(k)), ps.subset(range(k, size)), cost)
        out.append(_verdict(name, not bad, "" if not bad else f"lost hidden arcs {[(t, tuple(a)) for t, a in bad]}"))
    return out

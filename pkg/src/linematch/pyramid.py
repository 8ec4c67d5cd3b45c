"""Bottom-up pyramid solver for minimum-weight perfect matching on the line.

``W(i, j)`` is the minimum weight of a perfect matching on points
``x_i < ... < x_j`` (``j - i`` odd). Rows of increasing span are filled with

    W(i, j) = min(d(x_i, x_j) + W(i+1, j-1),
                  W(i, j-2) + W(i+2, j) - W(i+2, j-2))

starting from ``W(i, i-1) = 0`` and ``W(i+2, i-1) = -d(x_i, x_{i+1})``.

:func:`solve_full_table` fills the whole table. :func:`solve_matching` runs
the reduction scan instead: when the covering-arc alternative wins at a cell
``(i0, j0)``, the points strictly inside are frozen as consecutive pairs and
removed, the pair ``(i0, j0)`` becomes adjacent, and the scan carries on over
the smaller pyramid. Points still active at the top are paired consecutively.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Iterator, Literal

import numpy as np

from . import _kernels as K
from .costs import CostSpec, eval_cost
from .errors import CostValidationError, InvariantViolation, PreconditionError
from .matching import (Arc, Matching, PointSet, check_parity, is_nested,
                       matching_weight)

WINNER_NAMES = {K.FIRST: "first_alt", K.SECOND: "second_alt", K.TIE: "tie"}
_KIND_CODES = {"power": K.POWER, "log1p": K.LOG1P, "piecewise_linear": K.PWL}

REL_TOL = 1e-9
ABS_TOL = 1e-12


def _close(a: float, b: float, rel: float = REL_TOL, abs_: float = ABS_TOL) -> bool:
    return math.isclose(a, b, rel_tol=rel, abs_tol=abs_)


def _cost_args(cost: CostSpec):
    if not cost.is_valid:
        raise CostValidationError("; ".join(cost.problems()))
    bt, bv, bs = cost.kernel_arrays()
    return (_KIND_CODES[cost.kind], float(cost.alpha), float(cost.scale), bt, bv, bs)


def _storage(size: int) -> tuple[np.ndarray, np.ndarray]:
    # only touched slots are ever read, so the arrays are left uninitialised
    half = max(size // 2, 1)
    return np.empty((half, size)), np.empty((half, size), dtype=np.int8)


def boundary_value(ps: PointSet, cost: CostSpec, i: int, j: int) -> float:
    """Initial conditions of the recursion, 0-based.

    ``(i, i - 1)`` is the empty span and has weight 0. ``(i, i - 3)`` is the
    0-based form of ``W(k + 2, k - 1)`` with ``k = i - 2`` and equals
    ``-d(x_{i-2}, x_{i-1})``.
    """
    if j == i - 1:
        return 0.0
    if j == i - 3:
        if not (2 <= i <= len(ps)):
            raise PreconditionError(f"boundary pair ({i}, {j}) out of range")
        return -eval_cost(cost, ps[i - 2], ps[i - 1])
    raise PreconditionError(f"({i}, {j}) is not a boundary pair")


class PyramidTable:
    """All partial weights ``W(i, j)`` with the winning alternative of each cell."""

    def __init__(self, ps: PointSet, cost: CostSpec, values: np.ndarray,
                 winners: np.ndarray, cells_computed: int):
        self.ps = ps
        self.cost = cost
        self.n = ps.n
        self._values = values
        self._winners = winners
        self.cells_computed = cells_computed

    def _check(self, i: int, j: int):
        if not (0 <= i < j < 2 * self.n) or (j - i) % 2 == 0:
            raise PreconditionError(f"no cell ({i}, {j}) in a table on {2 * self.n} points")

    def value(self, i: int, j: int) -> float:
        self._check(i, j)
        return float(self._values[(j - i - 1) >> 1, i])

    def winner(self, i: int, j: int) -> str:
        self._check(i, j)
        return WINNER_NAMES[int(self._winners[(j - i - 1) >> 1, i])]

    def __getitem__(self, key) -> float:
        return self.value(*key)

    @property
    def top(self) -> float:
        return self.value(0, 2 * self.n - 1)

    def alternatives(self, i: int, j: int) -> tuple[float, float]:
        """Both arguments of the min at cell ``(i, j)``, recomputed from stored values."""
        self._check(i, j)
        ps, cost = self.ps, self.cost

        def w(a, b):
            return boundary_value(ps, cost, a, b) if b < a else self.value(a, b)

        first = eval_cost(cost, ps[i], ps[j]) + w(i + 1, j - 1)
        second = w(i, j - 2) + w(i + 2, j) - w(i + 2, j - 2)
        return first, second

    def min_margin(self) -> float:
        """Smallest ``|first - second|`` over cells of span >= 3 (inf if there are none)."""
        size = 2 * self.n
        best = math.inf
        for r in range(3, size, 2):
            for i in range(size - r):
                f, s = self.alternatives(i, i + r)
                best = min(best, abs(f - s))
        return best

    def cells(self) -> Iterator[tuple[int, int, float, str]]:
        """``(i, j, value, winner)`` by ascending span, then ascending ``i``."""
        size = 2 * self.n
        for r in range(1, size, 2):
            col = (r - 1) >> 1
            vals = self._values[col]
            wins = self._winners[col]
            for i in range(size - r):
                yield i, i + r, float(vals[i]), WINNER_NAMES[int(wins[i])]

    def row(self, span: int) -> list[float]:
        return [self.value(i, i + span) for i in range(2 * self.n - span)]

    def to_csv(self, sink=None) -> str | None:
        """Write ``i,j,value,winner`` lines; return the text if no sink is given."""
        buf = io.StringIO() if sink is None else sink
        for i, j, v, w in self.cells():
            buf.write(f"{i},{j},{v!r},{w}\n")
        return buf.getvalue() if sink is None else None

    def optimal_matching(self) -> Matching:
        """Read one optimal matching off the table.

        A cell won by the covering arc contributes ``(i, j)``; otherwise
        ``x_i`` and ``x_j`` lie under different outer arcs and the span splits
        at the first odd offset minimising ``W(i, k) + W(k+1, j)``.
        """
        arcs = []
        stack = [(0, 2 * self.n - 1)]
        while stack:
            i, j = stack.pop()
            if j < i:
                continue
            if self.winner(i, j) != "second_alt":
                arcs.append((i, j))
                stack.append((i + 1, j - 1))
                continue
            ks = np.arange(i + 1, j - 1, 2)
            cols_l = (ks - i - 1) >> 1
            cols_r = (j - ks - 2) >> 1
            totals = self._values[cols_l, i] + self._values[cols_r, ks + 1]
            k = int(ks[int(np.argmin(totals))])
            stack.append((i, k))
            stack.append((k + 1, j))
        return Matching(arcs)


def solve_full_table(ps: PointSet, cost: CostSpec) -> PyramidTable:
    args = _cost_args(cost)
    values, winners = _storage(len(ps))
    cells = K.fill_full(values, winners, ps.coords, *args)
    return PyramidTable(ps, cost, values, winners, int(cells))


@dataclass(frozen=True)
class ReductionEvent:
    i0: int
    j0: int
    removed: tuple[int, ...]
    recorded_arcs: tuple[Arc, ...]
    inner_weight: float


class SolverState:
    """Mutable state of one reduction scan.

    Drive it with :meth:`advance` (runs to the next trigger) and
    :func:`reduce_step`, or call :meth:`run` to finish in compiled code.
    """

    def __init__(self, ps: PointSet, cost: CostSpec):
        self.ps = ps
        self.cost = cost
        self._args = _cost_args(cost)
        size = len(ps)
        self._values, self._winners = _storage(size)
        self._active = np.arange(size, dtype=np.int64)
        self._st = np.zeros(K.S_SIZE, dtype=np.int64)
        self._st[K.S_R] = 1
        self._st[K.S_L] = size
        self._st[K.S_TP] = -1
        half = max(size // 2, 1)
        self._ev_i0 = np.zeros(half, dtype=np.int64)
        self._ev_j0 = np.zeros(half, dtype=np.int64)
        self._ev_off = np.zeros(half + 1, dtype=np.int64)
        self._ev_inner = np.zeros(half)
        self._removed = np.zeros(size, dtype=np.int64)
        self.finished = False

    # -- inspection -------------------------------------------------------
    @property
    def active(self) -> list[int]:
        return self._active[: self._st[K.S_L]].tolist()

    @property
    def cells_computed(self) -> int:
        return int(self._st[K.S_CELLS])

    @property
    def pending_trigger(self) -> tuple[int, int] | None:
        p = int(self._st[K.S_TP])
        if p < 0:
            return None
        a = self._active
        return int(a[p]), int(a[p + self._st[K.S_TR]])

    def value(self, i: int, j: int) -> float:
        return float(self._values[(j - i - 1) >> 1, i])

    def winner(self, i: int, j: int) -> str:
        return WINNER_NAMES[int(self._winners[(j - i - 1) >> 1, i])]

    def computed_cells(self) -> Iterator[tuple[int, int, float]]:
        """Cells of the current pyramid whose values are known, keyed by original indices."""
        st = self._st
        L = int(st[K.S_L])
        R = int(st[K.S_R])
        a = self._active
        pending = bool(st[K.S_PENDING])
        c, rr, rp = int(st[K.S_C]), int(st[K.S_RR]), int(st[K.S_RP])
        for r in range(1, min(R, L - 1) + 1, 2):
            for p in range(L - r):
                if r == R and p >= st[K.S_POS]:
                    break
                if pending and r < R and r >= rr:
                    lo, hi = max(0, c - r + 1), c
                    start = rp if r == rr else lo
                    if start <= p <= hi:
                        continue
                i, j = int(a[p]), int(a[p + r])
                yield i, j, self.value(i, j)

    @property
    def events(self) -> list[ReductionEvent]:
        out = []
        for e in range(int(self._st[K.S_NEV])):
            rem = tuple(self._removed[self._ev_off[e]: self._ev_off[e + 1]].tolist())
            arcs = tuple(Arc(rem[k], rem[k + 1]) for k in range(0, len(rem), 2))
            out.append(ReductionEvent(int(self._ev_i0[e]), int(self._ev_j0[e]), rem, arcs,
                                      float(self._ev_inner[e])))
        return out

    @property
    def top(self) -> float:
        a = self.active
        return self.value(a[0], a[-1])

    # -- driving ----------------------------------------------------------
    def advance(self) -> tuple[int, int] | None:
        """Scan to the next trigger cell and return it, or ``None`` at the top."""
        if self.pending_trigger is not None:
            raise PreconditionError("reduce the pending trigger before advancing")
        hit = K.advance(self._values, self._winners, self.ps.coords, self._active,
                        self._st, *self._args)
        if not hit:
            self.finished = True
            return None
        return self.pending_trigger

    def run(self) -> "SolverState":
        """Reduce any pending trigger, then finish the scan in compiled code."""
        if self.pending_trigger is not None:
            reduce_step(self, *self.pending_trigger)
        K.run_to_top(self._values, self._winners, self.ps.coords, self._active, self._st,
                     self._ev_i0, self._ev_j0, self._ev_off, self._ev_inner, self._removed,
                     *self._args)
        self.finished = True
        return self


def reduce_step(state: SolverState, i0: int, j0: int) -> SolverState:
    """Freeze the points inside the just-triggered cell ``(i0, j0)`` and shrink the pyramid.

    Interior points are paired consecutively and removed, every cell with an
    endpoint strictly inside ``(i0, j0)`` is dropped, the cell ``(i0, j0)``
    becomes a bottom-row cell with value ``d(x_i0, x_j0)``, and all other
    computed cells keep their values. The scan resumes at the lowest row that
    now has uncomputed cells.
    """
    pending = state.pending_trigger
    if pending != (i0, j0):
        known = any((i, j) == (i0, j0) for i, j, _ in state.computed_cells())
        if known and state.winner(i0, j0) == "second_alt":
            raise PreconditionError(f"cell ({i0}, {j0}) was won by the second alternative")
        raise PreconditionError(f"({i0}, {j0}) is not the pending trigger cell (pending: {pending})")
    K.reduce_pending(state._values, state._winners, state.ps.coords, state._active,
                     state._st, state._ev_i0, state._ev_j0, state._ev_off, state._ev_inner,
                     state._removed, *state._args)
    return state


def assemble_matching(events, final_active, size: int | None = None) -> Matching:
    """Union of the frozen arcs and consecutive pairs of the points left at the top."""
    final_active = list(final_active)
    if len(final_active) % 2:
        raise InvariantViolation("odd number of points left at the top of the pyramid")
    covered = [v for e in events for v in e.removed] + final_active
    if size is None:
        size = len(covered)
    if sorted(covered) != list(range(size)):
        raise InvariantViolation("removed points and final active points do not partition the instance")
    arcs = [a for e in events for a in e.recorded_arcs]
    arcs += [(final_active[k], final_active[k + 1]) for k in range(0, len(final_active), 2)]
    return Matching(arcs)


@dataclass
class SolverOptions:
    mode: Literal["reduction", "full_table"] = "reduction"
    rel_tol: float = REL_TOL


@dataclass
class SolveResult:
    matching: Matching
    total_weight: float
    events: list[ReductionEvent] = field(default_factory=list)
    cells_computed: int = 0
    mode: str = "reduction"
    final_active: list[int] = field(default_factory=list)

    @property
    def reductions(self) -> int:
        return len(self.events)


def _postcheck(ps, cost, matching, total, rel_tol):
    if not matching.is_perfect(len(ps)):
        raise InvariantViolation("assembled matching is not perfect")
    if not is_nested(matching):
        raise InvariantViolation("assembled matching is not nested")
    if not check_parity(matching):
        raise InvariantViolation("assembled matching violates parity")
    w = matching_weight(ps, cost, matching)
    if not _close(total, w, rel_tol):
        raise InvariantViolation(f"pyramid weight {total!r} disagrees with matching weight {w!r}")


def solve_matching(ps: PointSet, cost: CostSpec, opts: SolverOptions | None = None) -> SolveResult:
    opts = opts or SolverOptions()
    if opts.mode == "full_table":
        table = solve_full_table(ps, cost)
        m = table.optimal_matching()
        result = SolveResult(m, table.top, [], table.cells_computed, "full_table", [])
    elif opts.mode == "reduction":
        state = SolverState(ps, cost).run()
        events = state.events
        final = state.active
        m = assemble_matching(events, final, len(ps))
        total = state.top + sum(e.inner_weight for e in events)
        result = SolveResult(m, total, events, state.cells_computed, "reduction", final)
    else:
        raise PreconditionError(f"unknown solver mode {opts.mode!r}")
    _postcheck(ps, cost, result.matching, result.total_weight, opts.rel_tol)
    return result

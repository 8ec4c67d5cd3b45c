"""Compiled inner loops of the pyramid solver.

Cells are keyed by original point indices ``(i, j)`` and stored at
``values[(j - i - 1) >> 1, i]``, so a cell keeps its slot when points between
other cells are removed. Positions ``p`` index the active point list.

Scan state lives in a small int64 vector (see the ``S_*`` offsets) so that a
Python caller can stop at every trigger and resume afterwards.
"""

import numpy as np
from numba import njit

POWER, LOG1P, PWL = 0, 1, 2
SECOND, FIRST, TIE = 0, 1, 2

S_R = 0         # current scan row (span in active positions)
S_POS = 1       # next position in row S_R
S_PENDING = 2   # 1 while crossing cells around a merged pair need filling
S_C = 3         # active position of the left point of the merged pair
S_RR = 4        # repair row
S_RP = 5        # next position in the repair row
S_CELLS = 6     # cells computed so far
S_L = 7         # active length
S_TP = 8        # position of the pending trigger cell, -1 if none
S_TR = 9        # span of the pending trigger cell
S_NEV = 10      # events recorded
S_NREM = 11     # points removed
S_SIZE = 12


@njit(cache=True)
def gen(kind, alpha, scale, bt, bv, bs, t):
    if kind == POWER:
        return scale * t ** alpha
    if kind == LOG1P:
        return scale * np.log1p(t)
    # last breakpoint <= t
    lo = 0
    hi = bt.shape[0]
    while hi - lo > 1:
        mid = (lo + hi) >> 1
        if bt[mid] <= t:
            lo = mid
        else:
            hi = mid
    return scale * (bv[lo] + bs[lo] * (t - bt[lo]))


@njit(cache=True)
def _dist(xs, a, b, kind, alpha, scale, bt, bv, bs):
    return gen(kind, alpha, scale, bt, bv, bs, abs(xs[a] - xs[b]))


@njit(cache=True)
def _cell(values, active, p, q):
    i = active[p]
    return values[(active[q] - i - 1) >> 1, i]


@njit(cache=True)
def compute_cell(values, winners, xs, active, p, r, kind, alpha, scale, bt, bv, bs):
    """Fill cell ``(p, p + r)``; return True if it triggers a reduction.

    Spans below the table are the initial conditions: an empty span weighs 0
    and the span ``(p + 2, p - 1)`` weighs ``-d(x_p, x_{p+1})``.
    """
    q = p + r
    i = active[p]
    j = active[q]
    d = gen(kind, alpha, scale, bt, bv, bs, abs(xs[j] - xs[i]))
    if r == 1:
        first = d + 0.0
        second = 0.0 + 0.0 - (-d)
    else:
        first = d + _cell(values, active, p + 1, q - 1)
        outer = 0.0 if r == 3 else _cell(values, active, p + 2, q - 2)
        second = _cell(values, active, p, q - 2) + _cell(values, active, p + 2, q) - outer
    col = (j - i - 1) >> 1
    # branch-free: FIRST=1 if first wins, SECOND=0 if second wins, TIE=2 if equal
    values[col, i] = min(first, second)
    winners[col, i] = np.int8(first < second) + np.int8(2) * np.int8(first == second)
    return r >= 3 and first <= second


@njit(cache=True)
def fill_full(values, winners, xs, kind, alpha, scale, bt, bv, bs):
    """Fill every cell row by row with no reductions; return the cell count."""
    size = xs.shape[0]
    active = np.arange(size)
    cells = 0
    for r in range(1, size, 2):
        for p in range(size - r):
            compute_cell(values, winners, xs, active, p, r, kind, alpha, scale, bt, bv, bs)
            cells += 1
    return cells


@njit(cache=True)
def advance(values, winners, xs, active, st, kind, alpha, scale, bt, bv, bs):
    """Scan until the next trigger (return 1) or the top of the pyramid (return 0).

    Rows are filled by increasing span, left to right. After a reduction the
    only uncomputed cells below the scan row are those straddling the merged
    pair, so these are filled first, again by increasing span.
    """
    while True:
        L = st[S_L]
        if st[S_PENDING]:
            r = st[S_RR]
            if r > st[S_R] - 2 or r > L - 1:
                st[S_PENDING] = 0
                continue
            c = st[S_C]
            p = st[S_RP]
            if p > min(c, L - 1 - r):
                st[S_RR] = r + 2
                st[S_RP] = max(0, c - r - 1)
                continue
            st[S_RP] = p + 1
            st[S_CELLS] += 1
            if compute_cell(values, winners, xs, active, p, r, kind, alpha, scale, bt, bv, bs):
                st[S_TP] = p
                st[S_TR] = r
                return 1
            continue
        R = st[S_R]
        if R > L - 1:
            return 0
        p = st[S_POS]
        if p + R > L - 1:
            st[S_R] = R + 2
            st[S_POS] = 0
            continue
        st[S_POS] = p + 1
        st[S_CELLS] += 1
        if compute_cell(values, winners, xs, active, p, R, kind, alpha, scale, bt, bv, bs):
            st[S_TP] = p
            st[S_TR] = R
            return 1


@njit(cache=True)
def reduce_pending(values, winners, xs, active, st, ev_i0, ev_j0, ev_off, ev_inner,
                   removed, kind, alpha, scale, bt, bv, bs):
    """Remove the points strictly inside the pending trigger cell."""
    p = st[S_TP]
    r = st[S_TR]
    L = st[S_L]
    i0 = active[p]
    j0 = active[p + r]
    e = st[S_NEV]
    off = st[S_NREM]
    inner = 0.0
    for k in range(p + 1, p + r):
        removed[off + k - p - 1] = active[k]
    for k in range(p + 1, p + r, 2):
        inner += _dist(xs, active[k], active[k + 1], kind, alpha, scale, bt, bv, bs)
    ev_i0[e] = i0
    ev_j0[e] = j0
    ev_off[e + 1] = off + r - 1
    ev_inner[e] = inner
    st[S_NEV] = e + 1
    st[S_NREM] = off + r - 1

    shift = r - 1
    for k in range(p + 1, L - shift):
        active[k] = active[k + shift]
    st[S_L] = L - shift

    col = (j0 - i0 - 1) >> 1
    values[col, i0] = _dist(xs, i0, j0, kind, alpha, scale, bt, bv, bs)
    winners[col, i0] = TIE

    st[S_C] = p
    st[S_PENDING] = 1
    st[S_RR] = 3
    st[S_RP] = max(0, p - 2)
    st[S_POS] = max(0, p - st[S_R] + 1)
    st[S_TP] = -1
    st[S_TR] = 0


@njit(cache=True)
def run_to_top(values, winners, xs, active, st, ev_i0, ev_j0, ev_off, ev_inner,
               removed, kind, alpha, scale, bt, bv, bs):
    while advance(values, winners, xs, active, st, kind, alpha, scale, bt, bv, bs):
        reduce_pending(values, winners, xs, active, st, ev_i0, ev_j0, ev_off, ev_inner,
                       removed, kind, alpha, scale, bt, bv, bs)

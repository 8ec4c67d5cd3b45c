"""Point sets on the line, matchings as arc sets, and their structural predicates.

Indices are 0-based into the sorted coordinates. An arc ``(i, j)`` always has
``i < j``; arcs inside a :class:`Matching` are kept in ascending order so that
weights are summed in a fixed order and results are bit-reproducible.
"""

from __future__ import annotations

import math
from typing import Iterable, NamedTuple

import numpy as np

from .costs import CostSpec, eval_cost
from .errors import (DuplicatePointError, InputError, NonFiniteError,
                     OddCountError, PreconditionError)


class PointSet:
    """Strictly increasing, finite coordinates of even, nonzero count.

    ``permutation[k]`` is the input position of sorted point ``k`` when the
    points were supplied out of order, else ``None``.
    """

    __slots__ = ("coords", "permutation")

    def __init__(self, coords, permutation=None):
        arr = np.array(coords, dtype=np.float64).ravel()
        if arr.size == 0:
            raise OddCountError("point set is empty")
        if not np.all(np.isfinite(arr)):
            raise NonFiniteError("point set contains non-finite values")
        if arr.size % 2:
            raise OddCountError(f"point count must be even, got {arr.size}")
        diffs = np.diff(arr)
        if np.any(diffs == 0):
            k = int(np.flatnonzero(diffs == 0)[0])
            raise DuplicatePointError(f"duplicate coordinate {arr[k]!r}")
        if np.any(diffs < 0):
            raise InputError("coordinates must be strictly increasing; use PointSet.from_unsorted")
        arr.flags.writeable = False
        self.coords = arr
        self.permutation = None if permutation is None else tuple(int(p) for p in permutation)

    @classmethod
    def from_unsorted(cls, values) -> "PointSet":
        arr = np.array(values, dtype=np.float64).ravel()
        if not np.all(np.isfinite(arr)):
            raise NonFiniteError("point set contains non-finite values")
        order = np.argsort(arr, kind="stable")
        perm = None if np.all(order == np.arange(arr.size)) else order
        return cls(arr[order], perm)

    @property
    def n(self) -> int:
        return self.coords.size // 2

    def __len__(self):
        return self.coords.size

    def __getitem__(self, k):
        return float(self.coords[k])

    def __iter__(self):
        return iter(self.coords.tolist())

    def __eq__(self, other):
        return isinstance(other, PointSet) and np.array_equal(self.coords, other.coords)

    def __hash__(self):
        return hash(self.coords.tobytes())

    def __repr__(self):
        return f"PointSet({self.coords.tolist()!r})"

    def shifted(self, t: float) -> "PointSet":
        return PointSet(self.coords + t)

    def scaled(self, s: float) -> "PointSet":
        return PointSet(self.coords * s)

    def subset(self, indices: Iterable[int]) -> "PointSet":
        return PointSet(self.coords[sorted(indices)])


class Arc(NamedTuple):
    i: int
    j: int

    @classmethod
    def of(cls, a: int, b: int) -> "Arc":
        a, b = int(a), int(b)
        if a == b:
            raise PreconditionError(f"degenerate arc ({a}, {b})")
        return cls(a, b) if a < b else cls(b, a)

    def contains(self, other: "Arc") -> bool:
        """True if ``other`` lies strictly inside this arc."""
        return self.i < other.i and other.j < self.j

    def crosses(self, other: "Arc") -> bool:
        a, b = self
        c, d = other
        return a < c < b < d or c < a < d < b


class Matching:
    """Immutable set of vertex-disjoint arcs."""

    __slots__ = ("arcs",)

    def __init__(self, arcs: Iterable = ()):
        canon = sorted(Arc.of(*a) for a in arcs)
        seen = set()
        for a in canon:
            if a.i < 0:
                raise PreconditionError(f"negative index in arc {tuple(a)}")
            if a.i in seen or a.j in seen:
                raise PreconditionError(f"arc {tuple(a)} shares an endpoint with another arc")
            seen.update(a)
        self.arcs: tuple[Arc, ...] = tuple(canon)

    def __iter__(self):
        return iter(self.arcs)

    def __len__(self):
        return len(self.arcs)

    def __contains__(self, arc):
        return Arc.of(*arc) in set(self.arcs)

    def __eq__(self, other):
        if isinstance(other, Matching):
            return self.arcs == other.arcs
        return NotImplemented

    def __hash__(self):
        return hash(self.arcs)

    def __repr__(self):
        return f"Matching({[tuple(a) for a in self.arcs]})"

    def vertices(self) -> list[int]:
        return sorted(v for a in self.arcs for v in a)

    def is_perfect(self, size: int) -> bool:
        return self.vertices() == list(range(size))

    def replace(self, remove: Iterable[Arc], add: Iterable[Arc]) -> "Matching":
        drop = {Arc.of(*a) for a in remove}
        return Matching([a for a in self.arcs if a not in drop] + [Arc.of(*a) for a in add])

    def to_json(self) -> list[list[int]]:
        return [[a.i, a.j] for a in self.arcs]


def matching_weight(ps: PointSet, cost: CostSpec, m: Matching) -> float:
    """Sum of edge costs, accumulated in ascending arc order."""
    xs = ps.coords.tolist()
    size = len(xs)
    bad = next((a for a in m.arcs if a.j >= size), None)
    if bad is not None:
        raise PreconditionError(f"arc {tuple(bad)} out of range for {size} points")
    if not m.arcs:
        return 0.0
    # validate once; coordinates of a PointSet are already finite
    eval_cost(cost, xs[0], xs[0])
    g = cost.g
    total = 0.0
    for i, j in m.arcs:
        total += g(abs(xs[i] - xs[j]))
    return total


def count_crossings(m: Matching) -> int:
    """Number of unordered arc pairs with interleaved endpoints ``a < c < b < d``.

    Arcs are swept by left endpoint; a Fenwick tree over right endpoints
    counts earlier arcs whose right end falls strictly inside the current arc.
    """
    arcs = m.arcs
    if not arcs:
        return 0
    size = max(a.j for a in arcs) + 2
    tree = [0] * (size + 1)

    def add(k):
        k += 1
        while k <= size:
            tree[k] += 1
            k += k & -k

    def prefix(k):  # count of right endpoints <= k
        k += 1
        s = 0
        while k > 0:
            s += tree[k]
            k -= k & -k
        return s

    total = 0
    for c, d in arcs:  # ascending left endpoint
        total += prefix(d - 1) - prefix(c)
        add(d)
    return total


def is_nested(m: Matching) -> bool:
    """True iff no two arcs cross (equivalently ``count_crossings(m) == 0``)."""
    events = sorted([(a.i, 0, a) for a in m.arcs] + [(a.j, 1, a) for a in m.arcs])
    stack = []
    for _, closing, arc in events:
        if closing:
            if not stack or stack[-1] != arc:
                return False
            stack.pop()
        else:
            stack.append(arc)
    return True


def check_parity(m: Matching) -> bool:
    """Every arc joins an even-indexed point to an odd-indexed one."""
    return all((i + j) % 2 == 1 for i, j in m.arcs)


def uncross(m: Matching, a, b) -> Matching:
    """Replace the crossing pair ``(p, r), (q, s)`` with ``p < q < r < s`` by ``(p, s), (q, r)``.

    The nested replacement is used rather than the disjoint one
    ``(p, q), (r, s)``. An arc that crosses one of the new arcs crossed the
    old pair equally often, and an arc with exactly ``q`` and ``r`` strictly
    inside it crossed both old arcs and crosses neither new one. The total
    therefore drops by ``1 + 2k``, where ``k`` counts arcs of that last kind.
    """
    a, b = Arc.of(*a), Arc.of(*b)
    present = set(m.arcs)
    if a not in present or b not in present:
        raise PreconditionError("both arcs must belong to the matching")
    if not a.crosses(b):
        raise PreconditionError(f"arcs {tuple(a)} and {tuple(b)} do not cross")
    (p, r), (q, s) = sorted((a, b))
    return m.replace([a, b], [Arc(p, s), Arc(q, r)])


def crossing_pairs(m: Matching) -> list[tuple[Arc, Arc]]:
    """All crossing pairs, by brute force (quadratic; meant for small matchings)."""
    arcs = m.arcs
    return [(x, y) for k, x in enumerate(arcs) for y in arcs[k + 1:] if x.crosses(y)]


class ArcClassification(NamedTuple):
    exposed: frozenset
    hidden: frozenset


def classify_arcs(m: Matching) -> ArcClassification:
    """Split a nested matching into exposed arcs (covered by nothing) and hidden arcs."""
    if not is_nested(m):
        raise PreconditionError("exposed/hidden arcs are only defined for nested matchings")
    exposed, hidden = set(), set()
    reach = -math.inf  # right end of the current outermost arc
    for arc in m.arcs:  # ascending left endpoint
        if arc.i > reach:
            exposed.add(arc)
            reach = arc.j
        else:
            hidden.add(arc)
    return ArcClassification(frozenset(exposed), frozenset(hidden))


def consecutive_pairs_matching(ps: PointSet) -> Matching:
    return Matching((k, k + 1) for k in range(0, len(ps), 2))

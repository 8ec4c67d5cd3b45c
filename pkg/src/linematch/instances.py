"""Reading and generating point sets, and serialising solve results.

Points files hold whitespace-separated decimal numbers; ``#`` starts a
comment that runs to the end of the line. Results are JSON with indices into
the sorted points.

Random instances come from numpy's ``PCG64`` bit generator seeded with the
instance seed, so an instance is fully determined by its :class:`InstanceSpec`.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .costs import CostSpec
from .errors import (DuplicatePointError, GenerationError, NonFiniteError,
                     OddCountError, ParameterError, ParseError)
from .matching import PointSet, matching_weight
from .pyramid import SolveResult

MAX_RESAMPLE_ROUNDS = 100


def _read_text(source) -> str:
    if isinstance(source, bytes):
        return source.decode("utf-8")
    if isinstance(source, str):
        return source
    data = source.read()
    return data.decode("utf-8") if isinstance(data, bytes) else data


def read_points(source) -> PointSet:
    """Parse a points file (text, bytes, or a text/binary stream) into a sorted PointSet.

    If the input was not already sorted, ``permutation`` on the result maps
    each sorted position to its input position.
    """
    text = _read_text(source)
    values = []
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0]
        col = 0
        for tok in body.split():
            col = body.index(tok, col)
            try:
                v = float(tok)
            except ValueError:
                raise ParseError(f"line {lineno}, column {col + 1}: cannot parse {tok!r} as a number",
                                 line=lineno, column=col + 1, token_index=len(values)) from None
            if not math.isfinite(v):
                raise NonFiniteError(f"line {lineno}, column {col + 1}: non-finite value {tok!r}")
            values.append(v)
            col += len(tok)
    if not values or len(values) % 2:
        raise OddCountError(f"expected a nonzero even number of points, got {len(values)}")
    arr = np.array(values)
    srt = np.sort(arr)
    dup = np.flatnonzero(np.diff(srt) == 0)
    if dup.size:
        raise DuplicatePointError(f"duplicate point value {srt[dup[0]]!r}")
    return PointSet.from_unsorted(arr)


def format_points(ps: PointSet, header: str | None = None) -> str:
    lines = [f"# {header}"] if header else []
    lines += [repr(float(x)) for x in ps.coords]
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class InstanceSpec:
    size_2n: int
    distribution: Literal["uniform", "clustered"] = "uniform"
    seed: int = 0
    span: float = 1.0
    cluster_count: int = 1

    def __post_init__(self):
        if self.size_2n <= 0 or self.size_2n % 2:
            raise ParameterError(f"instance size must be a positive even integer, got {self.size_2n}")
        if self.distribution not in ("uniform", "clustered"):
            raise ParameterError(f"unknown distribution {self.distribution!r}")
        if not (0 <= self.seed < 2 ** 64):
            raise ParameterError("seed must be an unsigned 64-bit integer")
        if not (math.isfinite(self.span) and self.span > 0):
            raise ParameterError("span must be positive")
        if self.distribution == "clustered" and not (1 <= self.cluster_count <= self.size_2n // 2):
            raise ParameterError("cluster_count must lie in [1, size_2n / 2]")

    def describe(self) -> str:
        extra = f" clusters={self.cluster_count}" if self.distribution == "clustered" else ""
        return f"seed={self.seed} size={self.size_2n} distribution={self.distribution} span={self.span!r}{extra}"


def gen_instance(spec: InstanceSpec) -> PointSet:
    """Draw a random instance.

    ``uniform``: i.i.d. on ``[0, span)``. ``clustered``: centres uniform on
    ``[0, span)``, each point picks a centre uniformly and adds a Gaussian
    offset with ``sigma = span / (100 * cluster_count)``. Colliding values
    are redrawn.
    """
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    size = spec.size_2n
    if spec.distribution == "clustered":
        centres = rng.uniform(0.0, spec.span, spec.cluster_count)
        sigma = spec.span / (100.0 * spec.cluster_count)

        def draw(k):
            return centres[rng.integers(0, spec.cluster_count, k)] + rng.normal(0.0, sigma, k)
    else:
        def draw(k):
            return rng.uniform(0.0, spec.span, k)

    xs = draw(size)
    for _ in range(MAX_RESAMPLE_ROUNDS):
        xs.sort()
        dup = np.flatnonzero(np.diff(xs) == 0) + 1
        if dup.size == 0:
            return PointSet(xs)
        xs[dup] = draw(dup.size)
    raise GenerationError(f"could not draw {size} distinct values after {MAX_RESAMPLE_ROUNDS} rounds")


def result_to_dict(result: SolveResult, ps: PointSet, cost: CostSpec, seed: int | None = None) -> dict:
    """JSON-ready dict. ``weight`` is the arc-ordered sum over the matching."""
    out = {
        "points": ps.coords.tolist(),
        "cost": cost.to_text(),
        "matching": result.matching.to_json(),
        "weight": matching_weight(ps, cost, result.matching),
        "pyramid_weight": result.total_weight,
        "mode": result.mode,
        "events": [
            {"i0": e.i0, "j0": e.j0, "removed": list(e.removed),
             "arcs": [[a.i, a.j] for a in e.recorded_arcs], "inner_weight": e.inner_weight}
            for e in result.events
        ],
        "stats": {"cells_computed": result.cells_computed, "reductions": result.reductions},
    }
    if ps.permutation is not None:
        out["permutation"] = list(ps.permutation)
    if seed is not None:
        out["seed"] = seed
    return out


def write_result(result: SolveResult, ps: PointSet, cost: CostSpec, sink, seed: int | None = None):
    """Write the result JSON to a text or binary stream.

    Floats use Python's shortest round-trip repr, so points and weights
    parse back bit-exactly.
    """
    text = json.dumps(result_to_dict(result, ps, cost, seed), indent=1) + "\n"
    if isinstance(sink, (io.RawIOBase, io.BufferedIOBase)) or "b" in getattr(sink, "mode", ""):
        sink.write(text.encode("utf-8"))
    else:
        sink.write(text)

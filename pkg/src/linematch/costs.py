"""Shift-homogeneous concave distances ``d(x, y) = scale * g(|x - y|)``.

Three generator families are supported:

``power``
    ``g(t) = t ** alpha`` with ``0 < alpha <= 1``.
``log1p``
    ``g(t) = log(1 + t)``.
``piecewise_linear``
    linear interpolation through ``(t, v)`` breakpoints starting at
    ``(0, 0)``, extended past the last breakpoint with the last slope.

A :class:`CostSpec` is an immutable value. The ``make_*`` factories return
fully validated specs; constructing :class:`CostSpec` directly only checks
structure, so a non-concave spec can still be built and inspected with
:func:`validate_concavity`.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import CostValidationError, NonFiniteError, ParameterError

KINDS = ("power", "log1p", "piecewise_linear")

# absolute slack for validation comparisons
EPS_VAL = 1e-9


@dataclass(frozen=True)
class CostSpec:
    kind: str
    alpha: float = 1.0
    scale: float = 1.0
    breakpoints: tuple[tuple[float, float], ...] = ()
    source: str | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown cost kind {self.kind!r}")
        if not (math.isfinite(self.scale) and self.scale > 0):
            raise ParameterError(f"scale must be finite and > 0, got {self.scale}")
        if not math.isfinite(self.alpha):
            raise ParameterError(f"alpha must be finite, got {self.alpha}")
        bps = tuple((float(t), float(v)) for t, v in self.breakpoints)
        object.__setattr__(self, "breakpoints", bps)
        if self.kind == "piecewise_linear":
            if len(bps) < 2:
                raise CostValidationError("piecewise_linear needs at least two breakpoints")
            if bps[0] != (0.0, 0.0):
                raise CostValidationError("piecewise_linear must start at (0, 0)")
            for t, v in bps:
                if not (math.isfinite(t) and math.isfinite(v)):
                    raise NonFiniteError("breakpoints must be finite")
            ts = [t for t, _ in bps]
            if any(b <= a for a, b in zip(ts, ts[1:])):
                raise CostValidationError("breakpoint abscissae must be strictly increasing")

    @cached_property
    def slopes(self) -> tuple[float, ...]:
        """Segment slopes; the last entry also covers ``t`` beyond the final breakpoint."""
        bps = self.breakpoints
        s = [(v1 - v0) / (t1 - t0) for (t0, v0), (t1, v1) in zip(bps, bps[1:])]
        return tuple(s + s[-1:]) if s else ()

    def problems(self) -> list[str]:
        """Invariant violations beyond basic structure (empty when valid)."""
        out = []
        if self.kind == "power" and not (0.0 < self.alpha <= 1.0):
            out.append(f"power exponent must lie in (0, 1], got {self.alpha}")
        if self.kind == "piecewise_linear":
            s = self.slopes[:-1]
            if any(v < 0 for _, v in self.breakpoints):
                out.append("breakpoint values must be nonnegative")
            if s[0] <= 0:
                out.append("first slope must be positive so that g(t) > 0 for t > 0")
            if any(b < 0 for b in s):
                out.append("slopes must be nonnegative")
            for k, (a, b) in enumerate(zip(s, s[1:])):
                if b > a:
                    out.append(f"slope increases at breakpoint {k + 1} ({a} -> {b}): not concave")
        return out

    @cached_property
    def is_valid(self) -> bool:
        return not self.problems()

    def g(self, t):
        """Generator evaluated at ``t >= 0``; accepts a float or an ndarray."""
        if isinstance(t, np.ndarray):
            return self._g_array(t)
        if self.kind == "power":
            return self.scale * t ** self.alpha
        if self.kind == "log1p":
            return self.scale * math.log1p(t)
        ts = self._bt
        k = bisect.bisect_right(ts, t) - 1
        return self.scale * (self.breakpoints[k][1] + self.slopes[k] * (t - ts[k]))

    def _g_array(self, t: np.ndarray) -> np.ndarray:
        if self.kind == "power":
            return self.scale * np.power(t, self.alpha)
        if self.kind == "log1p":
            return self.scale * np.log1p(t)
        bt, bv, bs = self.kernel_arrays()
        k = np.searchsorted(bt, t, side="right") - 1
        return self.scale * (bv[k] + bs[k] * (t - bt[k]))

    @cached_property
    def _bt(self) -> list[float]:
        return [t for t, _ in self.breakpoints]

    def kernel_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Breakpoint abscissae, values and slopes as float64 arrays (empty if unused)."""
        if self.kind != "piecewise_linear":
            e = np.zeros(1)
            return e, e, e
        return (np.array(self._bt), np.array([v for _, v in self.breakpoints]),
                np.array(self.slopes))

    def to_text(self) -> str:
        if self.kind == "power":
            base = f"power:{self.alpha!r}"
        elif self.kind == "log1p":
            return f"log1p:{self.scale!r}"
        else:
            base = f"pwl:{self.source}" if self.source else "pwl:<inline>"
        return base if self.scale == 1.0 else f"{base}*{self.scale!r}"

    def __str__(self):
        return self.to_text()


def eval_cost(cost: CostSpec, x: float, y: float, *, unchecked: bool = False) -> float:
    """Edge weight between ``x`` and ``y``.

    Only ``|x - y|`` is consumed, so the result is exactly symmetric and
    exactly invariant under a common shift of both arguments.
    """
    if not (math.isfinite(x) and math.isfinite(y)):
        raise NonFiniteError(f"non-finite coordinate in eval_cost({x}, {y})")
    if not unchecked and not cost.is_valid:
        raise CostValidationError("; ".join(cost.problems()))
    return cost.g(abs(x - y))


def make_power_cost(alpha: float) -> CostSpec:
    alpha = float(alpha)
    if not (0.0 < alpha <= 1.0):
        raise ParameterError(f"power exponent must lie in (0, 1], got {alpha}")
    return CostSpec("power", alpha=alpha)


def make_log1p_cost(scale: float = 1.0) -> CostSpec:
    return CostSpec("log1p", scale=float(scale))


def make_piecewise_cost(breakpoints, source: str | None = None) -> CostSpec:
    spec = CostSpec("piecewise_linear", breakpoints=tuple(breakpoints), source=source)
    probs = spec.problems()
    if probs:
        raise CostValidationError("; ".join(probs))
    return spec


def read_breakpoints(path) -> list[tuple[float, float]]:
    """Read ``t v`` pairs, one per line; blank lines and ``#`` comments are skipped."""
    pairs = []
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParameterError(f"{path}:{lineno}: expected 't v', got {line!r}")
        try:
            pairs.append((float(parts[0]), float(parts[1])))
        except ValueError:
            raise ParameterError(f"{path}:{lineno}: cannot parse {line!r}") from None
    return pairs


def parse_cost(text: str) -> CostSpec:
    """Parse ``power:<alpha>``, ``log1p:<scale>`` or ``pwl:<path>``."""
    kind, sep, arg = text.partition(":")
    if not sep or not arg:
        raise ParameterError(f"cost must look like 'power:0.5', 'log1p:1.0' or 'pwl:<path>', got {text!r}")
    kind = kind.strip().lower()
    scale = 1.0
    if kind in ("power", "pwl") and "*" in arg:
        arg, _, sc = arg.rpartition("*")
        try:
            scale = float(sc)
        except ValueError:
            raise ParameterError(f"cannot parse scale {sc!r}") from None
    if kind == "pwl":
        try:
            bps = read_breakpoints(arg)
        except OSError as exc:
            raise ParameterError(f"cannot read breakpoint file {arg!r}: {exc.strerror}") from None
        spec = make_piecewise_cost(bps, source=arg)
        return spec if scale == 1.0 else replace(spec, scale=scale)
    try:
        value = float(arg)
    except ValueError:
        raise ParameterError(f"cannot parse cost parameter {arg!r}") from None
    if kind == "power":
        spec = make_power_cost(value)
        return spec if scale == 1.0 else replace(spec, scale=scale)
    if kind == "log1p":
        if not (math.isfinite(value) and value > 0):
            raise ParameterError(f"log1p scale must be > 0, got {value}")
        return make_log1p_cost(value)
    raise ParameterError(f"unknown cost kind {kind!r}")


@dataclass
class Violation:
    check: str
    t1: float
    t2: float
    lam: float
    lhs: float
    rhs: float


@dataclass
class ValidationReport:
    valid: bool
    strict: bool
    violations: list[Violation]
    notes: list[str]
    probes: int

    def __str__(self):
        head = "valid" if self.valid else f"invalid ({len(self.violations)} violations)"
        return "; ".join([head, *self.notes])


def validate_concavity(cost: CostSpec, probe_count: int = 33, t_max: float = 10.0,
                       eps: float = EPS_VAL) -> ValidationReport:
    """Probe ``g`` on a deterministic grid and report every violated condition.

    Checks ``g(0) = 0``, positivity and monotonicity on the grid, the
    concavity inequality for all grid pairs and grid weights (plus the
    midpoint weight), and subadditivity ``g(a + b) <= g(a) + g(b)``, which is
    what the triangle inequality needs. Violations are collected, not raised.
    """
    if probe_count < 3:
        raise ParameterError("probe_count must be at least 3")
    if not (t_max > 0):
        raise ParameterError("t_max must be positive")
    g = lambda t: cost.g(t)  # noqa: E731
    ts = [t_max * k / (probe_count - 1) for k in range(probe_count)]
    lams = sorted({k / (probe_count - 1) for k in range(1, probe_count - 1)} | {0.5})
    gt = [g(t) for t in ts]
    viol: list[Violation] = []
    notes: list[str] = []

    if gt[0] != 0.0:
        viol.append(Violation("g(0)=0", 0.0, 0.0, 0.0, gt[0], 0.0))
    for t, v in zip(ts[1:], gt[1:]):
        if not v > 0:
            viol.append(Violation("positive", t, t, 1.0, v, 0.0))
    for (a, ga), (b, gb) in zip(zip(ts, gt), zip(ts[1:], gt[1:])):
        if gb < ga - eps:
            viol.append(Violation("nondecreasing", a, b, 0.0, gb, ga))

    strict = True
    n_probe = len(ts)
    for p in range(n_probe):
        for q in range(p + 1, n_probe):
            t1, t2 = ts[p], ts[q]
            for lam in lams:
                lhs = g(lam * t1 + (1 - lam) * t2)
                rhs = lam * gt[p] + (1 - lam) * gt[q]
                if lhs < rhs - eps:
                    viol.append(Violation("concavity", t1, t2, lam, lhs, rhs))
                elif lhs <= rhs + eps:
                    strict = False
            s = t1 + t2
            if g(s) > gt[p] + gt[q] + eps:
                viol.append(Violation("subadditivity", t1, t2, 1.0, g(s), gt[p] + gt[q]))

    valid = not viol
    if not valid:
        strict = False
    if valid and not strict:
        notes.append("strictness not detected")
    return ValidationReport(valid, strict, viol, notes, n_probe)

"""Command-line front end: ``solve``, ``table``, ``check``, ``gen`` and ``bench``.

Exit codes: 0 success, 1 a checked property failed, 2 bad input, 3 internal
invariant violation. Errors are reported on stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import bench as benchmod
from . import pyramid
from .costs import parse_cost
from .errors import InputError, InvariantViolation, MatchingError, ParameterError
from .instances import (InstanceSpec, format_points, gen_instance, read_points,
                        write_result)
from .matching import PointSet
from .verify import run_checks

EXIT_OK, EXIT_PROPERTY, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3
COMMANDS = ("solve", "table", "check", "gen", "bench")
MODES = {"reduce": "reduction", "full": "full_table"}


@dataclass
class CommandPlan:
    command: str
    input_path: str | None = None
    cost: str = "power:0.5"
    output_path: str | None = None
    sizes: list[int] = field(default_factory=list)
    repetitions: int = 5
    seed: int | None = None
    spec: InstanceSpec | None = None
    mode: str = "reduce"
    splits: list[float] = field(default_factory=list)
    nested_cap: int = 1024

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ParameterError(f"unknown command {self.command!r}")
        if self.mode not in MODES:
            raise ParameterError(f"--mode must be one of {sorted(MODES)}")
        if self.command == "bench":
            if len(self.sizes) < 3:
                raise ParameterError("bench needs at least 3 sizes")
            if any(s <= 0 or s % 2 for s in self.sizes):
                raise ParameterError("bench sizes must be positive even integers")
            if any(b <= a for a, b in zip(self.sizes, self.sizes[1:])):
                raise ParameterError("bench sizes must be strictly ascending")
            if self.repetitions < 1:
                raise ParameterError("--reps must be positive")


class _ArgumentError(InputError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _ArgumentError(message)


def _sizes(text: str) -> list[int]:
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of integers: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="linematch", description="Minimum-weight perfect matching on the line under concave costs.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, with_input=True):
        sp.add_argument("--cost", default="power:0.5",
                        help="power:<alpha>, log1p[:<scale>] or pwl:<breakpoints file> (default power:0.5)")
        sp.add_argument("--output", "-o", help="write here instead of standard output")
        if with_input:
            sp.add_argument("input", nargs="?", help="points file, '-' for standard input")
            sp.add_argument("--size", type=int, help="generate an instance of this many points instead of reading one")
            gen_opts(sp)

    def gen_opts(sp):
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--distribution", choices=("uniform", "clustered"), default="uniform")
        sp.add_argument("--clusters", type=int, default=1)
        sp.add_argument("--span", type=float, default=1.0)

    sp = sub.add_parser("solve", help="solve one instance and print the result JSON")
    common(sp)
    sp.add_argument("--mode", choices=sorted(MODES), default="reduce")

    sp = sub.add_parser("table", help="dump pyramid cells as CSV i,j,value,winner")
    common(sp)
    sp.add_argument("--mode", choices=sorted(MODES), default="full")

    sp = sub.add_parser("check", help="run the property checks on one instance")
    common(sp)
    sp.add_argument("--split", type=float, action="append", default=[],
                    help="coordinate separating two blocks for the stabilization check; repeatable")

    sp = sub.add_parser("gen", help="write a random points file")
    common(sp, with_input=False)
    sp.add_argument("--size", type=int, required=True)
    gen_opts(sp)

    sp = sub.add_parser("bench", help="time the solver over several sizes, CSV out")
    common(sp, with_input=False)
    sp.add_argument("--sizes", type=_sizes, default=[256, 512, 1024, 2048, 4096, 8192])
    sp.add_argument("--reps", type=int, default=5)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--nested-cap", type=int, default=1024,
                    help="largest size at which the cubic reference is also timed")
    return p


def plan_from_args(ns: argparse.Namespace) -> CommandPlan:
    spec = None
    if getattr(ns, "size", None) is not None:
        spec = InstanceSpec(ns.size, ns.distribution, 0 if ns.seed is None else ns.seed,
                            ns.span, ns.clusters)
    if ns.command in ("solve", "table", "check"):
        if (ns.input is None) == (spec is None):
            raise ParameterError("give exactly one of a points file or --size")
    return CommandPlan(
        command=ns.command,
        input_path=getattr(ns, "input", None),
        cost=ns.cost,
        output_path=ns.output,
        sizes=getattr(ns, "sizes", []),
        repetitions=getattr(ns, "reps", 5),
        seed=spec.seed if spec else getattr(ns, "seed", None),
        spec=spec,
        mode=getattr(ns, "mode", "reduce"),
        splits=getattr(ns, "split", []),
        nested_cap=getattr(ns, "nested_cap", 1024),
    )


class _Sink:
    """Standard output or a file opened on first use."""

    def __init__(self, path: str | None, stdout):
        self.path = path
        self.stdout = stdout

    def __enter__(self):
        if self.path is None:
            self.fh = self.stdout
        else:
            try:
                self.fh = open(self.path, "w", encoding="utf-8", newline="\n")
            except OSError as exc:
                raise InputError(f"cannot write {self.path}: {exc.strerror}") from None
        return self.fh

    def __exit__(self, *exc):
        if self.fh is not self.stdout:
            self.fh.close()


def load_instance(plan: CommandPlan, stdin=None) -> PointSet:
    if plan.spec is not None:
        return gen_instance(plan.spec)
    if plan.input_path == "-":
        return read_points((stdin or sys.stdin).read())
    path = Path(plan.input_path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {plan.input_path}: {exc.strerror}") from None
    return read_points(data)


def run_solve(plan: CommandPlan, stdout, stderr, stdin=None) -> int:
    cost = parse_cost(plan.cost)
    ps = load_instance(plan, stdin)
    res = pyramid.solve_matching(ps, cost, pyramid.SolverOptions(mode=MODES[plan.mode]))
    with _Sink(plan.output_path, stdout) as out:
        write_result(res, ps, cost, out, seed=plan.seed if plan.spec else None)
    return EXIT_OK


def run_table(plan: CommandPlan, stdout, stderr, stdin=None) -> int:
    cost = parse_cost(plan.cost)
    ps = load_instance(plan, stdin)
    with _Sink(plan.output_path, stdout) as out:
        if plan.mode == "full":
            pyramid.solve_full_table(ps, cost).to_csv(out)
        else:
            state = pyramid.SolverState(ps, cost).run()
            for i, j, v in state.computed_cells():
                out.write(f"{i},{j},{v!r},{state.winner(i, j)}\n")
    return EXIT_OK


def run_check(plan: CommandPlan, stdout, stderr, stdin=None) -> int:
    cost = parse_cost(plan.cost)
    ps = load_instance(plan, stdin)
    results = run_checks(ps, cost, plan.splits)
    with _Sink(plan.output_path, stdout) as out:
        for r in results:
            out.write(r.line() + "\n")
    failed = [r.name for r in results if not r.ok]
    if failed:
        json.dump({"failed": failed, "cost": cost.to_text(), "points": ps.coords.tolist(),
                   "seed": plan.seed if plan.spec else None}, stderr)
        stderr.write("\n")
        return EXIT_PROPERTY
    return EXIT_OK


def run_gen(plan: CommandPlan, stdout, stderr, stdin=None) -> int:
    ps = gen_instance(plan.spec)
    with _Sink(plan.output_path, stdout) as out:
        out.write(format_points(ps, plan.spec.describe()))
    return EXIT_OK


def run_bench(plan: CommandPlan, stdout, stderr, stdin=None) -> int:
    cost = parse_cost(plan.cost)
    rows = benchmod.run_bench(plan.sizes, plan.repetitions, plan.seed or 0, cost, plan.nested_cap)
    with _Sink(plan.output_path, stdout) as out:
        out.write(benchmod.format_csv(rows))
    for r in rows:
        if r.nested_median_ns is not None:
            stderr.write(f"n={r.n}: solve {r.median_ns} ns, nested_dp {r.nested_median_ns} ns\n")
    return EXIT_OK


RUNNERS = {"solve": run_solve, "table": run_table, "check": run_check, "gen": run_gen, "bench": run_bench}


def _report(stderr, kind: str, exc: Exception):
    json.dump({"error": kind, "type": type(exc).__name__, "message": str(exc)}, stderr)
    stderr.write("\n")


def main(argv=None, stdout=None, stderr=None, stdin=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s", stream=stderr)
    try:
        ns = build_parser().parse_args(argv)
        plan = plan_from_args(ns)
        return RUNNERS[plan.command](plan, stdout, stderr, stdin)
    except InvariantViolation as exc:
        _report(stderr, "invariant", exc)
        return EXIT_INTERNAL
    except (InputError, MatchingError) as exc:
        _report(stderr, "input", exc)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

import io
import json
import subprocess
import sys

import pytest

from linematch import cli, pyramid
from linematch.errors import InvariantViolation, ParameterError
from linematch.pyramid import SolveResult


def run(argv, stdin=None):
    out, err = io.StringIO(), io.StringIO()
    code = cli.main(argv, stdout=out, stderr=err, stdin=io.StringIO(stdin) if stdin else None)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def points_file(tmp_path):
    f = tmp_path / "points.txt"
    f.write_text("0 4.9\n5.1 10\n")
    return f


def test_solve(points_file):
    code, out, _ = run(["solve", "--cost", "power:0.5", str(points_file)])
    assert code == 0
    doc = json.loads(out)
    assert doc["weight"] == pytest.approx(3.6094912556683373, rel=1e-15)
    assert doc["matching"] == [[0, 3], [1, 2]] and "seed" not in doc


def test_solve_full_mode_and_output_file(points_file, tmp_path):
    dest = tmp_path / "r.json"
    code, out, _ = run(["solve", "--mode", "full", "-o", str(dest), str(points_file)])
    assert code == 0 and out == ""
    assert json.loads(dest.read_text())["mode"] == "full_table"


def test_solve_stdin():
    code, out, _ = run(["solve", "-"], stdin="3 2 1 0")
    assert code == 0 and json.loads(out)["permutation"] == [3, 2, 1, 0]


def test_solve_generated_echoes_seed():
    code, out, _ = run(["solve", "--size", "10", "--seed", "77"])
    assert code == 0 and json.loads(out)["seed"] == 77


def test_missing_file_names_path(tmp_path):
    missing = tmp_path / "nope.txt"
    code, _, err = run(["solve", str(missing)])
    assert code == 2
    doc = json.loads(err)
    assert doc["error"] == "input" and str(missing) in doc["message"]


@pytest.mark.parametrize("argv", [["solve", "--cost", "power:1.5", "-"], ["solve"], ["frobnicate"],
                                  ["bench", "--sizes", "4,8"], ["bench", "--sizes", "8,4,16"],
                                  ["bench", "--sizes", "4,6,7"], ["solve", "--mode", "half", "-"]])
def test_input_errors_exit_2(argv):
    code, _, err = run(argv, stdin="0 1")
    assert code == 2 and json.loads(err.splitlines()[-1])["error"] == "input"


def test_bad_points_exit_2():
    code, _, err = run(["solve", "-"], stdin="0 1 zz 3")
    assert code == 2 and "column" in json.loads(err)["message"]


def test_invariant_violation_exit_3(points_file, monkeypatch):
    def broken(*a, **k):
        raise InvariantViolation("weights disagree")
    monkeypatch.setattr(pyramid, "solve_matching", broken)
    code, _, err = run(["solve", str(points_file)])
    assert code == 3 and json.loads(err)["error"] == "invariant"


def test_check_passes(points_file):
    code, out, _ = run(["check", str(points_file)])
    assert code == 0
    assert all(line.startswith("[PASS]") for line in out.splitlines())
    assert {ln.split()[1].rstrip(":") for ln in out.splitlines()} >= {
        "oracle-weight", "nested-dp-weight", "perfect", "nested", "parity", "bellman"}


def test_check_fault_injection(points_file, monkeypatch):
    real = pyramid.solve_matching

    def corrupted(ps, cost, opts=None):
        r = real(ps, cost, opts)
        return SolveResult(r.matching, r.total_weight * 1.01, r.events, r.cells_computed, r.mode)
    monkeypatch.setattr(pyramid, "solve_matching", corrupted)
    code, out, err = run(["check", str(points_file)])
    assert code == 1
    assert "[FAIL] oracle-weight" in out
    doc = json.loads(err)
    assert "oracle-weight" in doc["failed"] and doc["points"] == [0.0, 4.9, 5.1, 10.0]


def test_check_size_cap_skip():
    code, out, _ = run(["check", "--size", "14", "--seed", "3"])
    assert code == 0
    line = next(ln for ln in out.splitlines() if "oracle-weight" in ln)
    assert line.startswith("[SKIP]") and "skipped (size cap" in line
    assert sum(ln.startswith("[PASS]") for ln in out.splitlines()) >= 7


def test_check_with_split(tmp_path):
    f = tmp_path / "p.txt"
    f.write_text("0 0.3 0.35 1 5 5.2 5.25 6\n")
    code, out, _ = run(["check", "--split", "3", str(f)])
    assert code == 0 and "[PASS] stabilization@3.0" in out
    code, _, _ = run(["check", "--split", "0.4", str(f)])
    assert code == 2
    code, out, _ = run(["check", "--cost", "power:1", "--split", "3", str(f)])
    assert code == 0 and "[SKIP] stabilization@3.0: skipped (cost not strictly concave)" in out


def test_gen_and_determinism(tmp_path):
    a = run(["gen", "--size", "12", "--seed", "5", "--distribution", "clustered", "--clusters", "2"])
    b = run(["gen", "--size", "12", "--seed", "5", "--distribution", "clustered", "--clusters", "2"])
    assert a == b and a[0] == 0
    assert a[1].startswith("# seed=5 size=12 distribution=clustered")
    f = tmp_path / "g.txt"
    f.write_text(a[1])
    s1, s2 = run(["solve", str(f)]), run(["solve", str(f)])
    assert s1 == s2 and s1[0] == 0


def test_table_modes(points_file):
    code, out, _ = run(["table", str(points_file)])
    assert code == 0 and out.splitlines()[-1].endswith(",first_alt")
    assert len(out.splitlines()) == 4
    code, out, _ = run(["table", "--mode", "reduce", str(points_file)])
    assert code == 0 and out.splitlines() == ["0,3,3.1622776601683795,tie"]


def test_bench_csv():
    code, out, err = run(["bench", "--sizes", "16,32,64", "--reps", "2", "--nested-cap", "32"])
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "n,median_ns,cells,slope_running"
    rows = [ln.split(",") for ln in lines[1:]]
    for n, med, cells, _ in rows:
        assert int(med) > 0 and int(cells) <= int(n) // 2 * (int(n) - 1)
    assert "nested_dp" in err


def test_command_plan_validation():
    with pytest.raises(ParameterError):
        cli.CommandPlan("bench", sizes=[2, 4])
    with pytest.raises(ParameterError):
        cli.CommandPlan("explode")
    assert cli.CommandPlan("bench", sizes=[2, 4, 6]).repetitions == 5


def test_module_entry_point(points_file):
    proc = subprocess.run([sys.executable, "-m", "linematch", "solve", str(points_file)],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and json.loads(proc.stdout)["stats"]["reductions"] == 1

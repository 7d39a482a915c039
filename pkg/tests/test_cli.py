import json
import subprocess
import sys

import pytest

from hdcarp.graph import load_instance, validate_instance
from hdcarp.solution import load_solution


def run_cli(*args, cwd=None):
    return subprocess.run(
        [sys.executable, "-m", "hdcarp.cli", *map(str, args)],
        capture_output=True,
        text=True,
        cwd=cwd,
    )


@pytest.fixture
def instance_file(tmp_path):
    path = tmp_path / "inst.json"
    res = run_cli("gen", "--arcs", 8, "--vehicles", 2, "--classes", 2,
                  "--seed", 4, "--out", path)
    assert res.returncode == 0, res.stderr
    return path


class TestGen:
    def test_writes_valid_instance(self, instance_file):
        inst = load_instance(instance_file)
        assert validate_instance(inst) == []
        assert inst.num_vehicles == 2


class TestSolveEvalRefine:
    def test_solve_writes_solution_and_objective(self, tmp_path, instance_file):
        out = tmp_path / "sol.json"
        res = run_cli("solve", "--algo", "ils", "--variant", "p",
                      "--in", instance_file, "--out", out, "--seed", 3)
        assert res.returncode == 0, res.stderr
        payload = json.loads(res.stdout)
        assert "objective" in payload and len(payload["objective"]) == 2
        sol, variant = load_solution(out)
        assert variant.value == "P"

    def test_eval_feasible(self, tmp_path, instance_file):
        out = tmp_path / "sol.json"
        run_cli("solve", "--algo", "greedy", "--variant", "u",
                "--in", instance_file, "--out", out, "--seed", 1)
        res = run_cli("eval", "--in", instance_file, "--sol", out)
        assert res.returncode == 0
        payload = json.loads(res.stdout)
        assert payload["feasible"] is True

    def test_eval_infeasible_exit_2(self, tmp_path, instance_file):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"variant": "P", "routes": [[], []]}))
        res = run_cli("eval", "--in", instance_file, "--sol", bad)
        assert res.returncode == 2
        assert json.loads(res.stdout)["feasible"] is False

    def test_refine_never_worsens(self, tmp_path, instance_file):
        raw = tmp_path / "raw.json"
        res = run_cli("solve", "--algo", "greedy", "--variant", "p",
                      "--in", instance_file, "--out", raw, "--seed", 2)
        before = json.loads(res.stdout)["objective"]
        refined = tmp_path / "refined.json"
        res = run_cli("refine", "--in", instance_file, "--sol", raw,
                      "--variant", "p", "--out", refined)
        assert res.returncode == 0, res.stderr
        after = json.loads(res.stdout)["objective"]
        assert tuple(after) <= tuple(before)

    def test_invalid_instance_exit_2(self, tmp_path):
        broken = tmp_path / "broken.json"
        broken.write_text(json.dumps({
            "depot": 0, "num_vehicles": 1, "capacity": 1.0, "num_classes": 1,
            "nodes": [{"id": 0, "x": 0.0, "y": 0.0}],
            "arcs": [],
        }))
        res = run_cli("eval", "--in", broken, "--sol", broken)
        assert res.returncode == 2


class TestDeterminism:
    @pytest.mark.parametrize("algo", ["greedy", "ls", "ils", "aco"])
    def test_solve_byte_identical_across_runs(self, tmp_path, instance_file, algo):
        outputs = []
        for i in range(3):
            out = tmp_path / f"{algo}{i}.json"
            res = run_cli("solve", "--algo", algo, "--variant", "p",
                          "--in", instance_file, "--out", out, "--seed", 9,
                          "--kmax", 5, "--ants", 4)
            assert res.returncode == 0, res.stderr
            outputs.append(out.read_bytes())
        assert outputs[0] == outputs[1] == outputs[2]

    def test_solve_thread_count_invariant(self, tmp_path, instance_file):
        blobs = []
        for threads in (1, 4):
            out = tmp_path / f"t{threads}.json"
            res = run_cli("solve", "--algo", "ils", "--variant", "u",
                          "--in", instance_file, "--out", out,
                          "--seed", 9, "--threads", threads)
            assert res.returncode == 0, res.stderr
            blobs.append(out.read_bytes())
        assert blobs[0] == blobs[1]


class TestOracleAndMilp:
    def test_oracle_subcommand(self, instance_file):
        res = run_cli("oracle", "--in", instance_file, "--variant", "p")
        assert res.returncode == 0, res.stderr
        payload = json.loads(res.stdout)
        assert len(payload["objective"]) == 2

    def test_milp_emits_stage_files(self, tmp_path, instance_file):
        out_dir = tmp_path / "models"
        res = run_cli("milp", "--in", instance_file, "--variant", "p",
                      "--mode", "enumerate", "--out-dir", out_dir)
        assert res.returncode == 0, res.stderr
        files = sorted(p.name for p in out_dir.glob("*.lp"))
        assert files == ["inst.p.stage1.lp", "inst.p.stage2.lp"]

    def test_milp_point_separation(self, tmp_path, instance_file):
        out_dir = tmp_path / "models"
        point = tmp_path / "point.json"
        point.write_text(json.dumps({"x_a0_m0": 1.0}))
        res = run_cli("milp", "--in", instance_file, "--variant", "p",
                      "--mode", "deferred", "--out-dir", out_dir,
                      "--point", point)
        assert res.returncode == 0, res.stderr
        cut_lines = [l for l in res.stdout.splitlines() if l.startswith("{")]
        for line in cut_lines:
            cut = json.loads(line)
            assert set(cut) == {"component", "class", "vehicle"}


class TestBench:
    def test_bench_csv(self, tmp_path):
        spec = tmp_path / "bench.json"
        spec.write_text(json.dumps({
            "variant": "p",
            "algorithms": ["greedy", "ls"],
            "reference": "oracle",
            "seed": 0,
            "instances": [{"arcs": 8, "vehicles": 2, "classes": 2,
                           "seed": 0, "count": 2}],
        }))
        out = tmp_path / "rows.csv"
        res = run_cli("bench", "--spec", spec, "--out", out)
        assert res.returncode == 0, res.stderr
        from hdcarp.bench import read_bench_csv

        rows = read_bench_csv(out)
        assert len(rows) == 4
        assert all(r.status == "ok" for r in rows)

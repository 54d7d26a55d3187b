import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from kmslat import cli

GOLDEN = Path(__file__).parent / "golden"
TASKS = json.loads((GOLDEN / "tasks.json").read_text())
# set KMSLAT_REGEN_GOLDEN=1 to rewrite the expected outputs
REGEN = os.environ.get("KMSLAT_REGEN_GOLDEN") == "1"


def run_cli(capsys, task, job_path, *extra):
    code = cli.main([task, "--job", str(job_path), *extra])
    out, err = capsys.readouterr()
    return code, out, err


def transcript(code, out, err):
    return f"exit: {code}\n--- stdout\n{out}--- stderr\n{err}"


@pytest.mark.parametrize("name", sorted(TASKS))
def test_golden(capsys, name):
    job = GOLDEN / "jobs" / f"{name}.json"
    code, out, err = run_cli(capsys, TASKS[name], job)
    got = transcript(code, out, err)
    expected_path = GOLDEN / f"{name}.out"
    if REGEN:
        expected_path.write_text(got)
    assert got == expected_path.read_text()


def test_spec_examples(capsys):
    code, out, _ = run_cli(capsys, "dilation", GOLDEN / "jobs" / "dilation_two.json")
    assert code == 0 and "dilation: true" in out
    code, out, _ = run_cli(capsys, "stable-lattice", GOLDEN / "jobs" / "stable_diag21.json")
    assert "basis {(0,1)}" in out
    code, out, _ = run_cli(capsys, "eval", GOLDEN / "jobs" / "eval_two_delta0.json")
    assert out.splitlines()[0].endswith("5/9 ± 0")


@pytest.mark.parametrize("name, code, needle", [
    ("error_singular", 2, "job.matrix: determinant is zero"),
    ("error_float_r", 2, "job.r"),
    ("error_infeasible", 2, "job.r"),
    ("error_missing_measure", 2, "job.measure: required"),
    ("error_cap", 3, "size cap"),
    ("trace_witness", 1, ""),
])
def test_exit_codes(capsys, name, code, needle):
    got, _, err = run_cli(capsys, TASKS[name], GOLDEN / "jobs" / f"{name}.json")
    assert got == code
    assert needle in err


def test_task_mismatch_and_unknown_option(tmp_path, capsys):
    job = tmp_path / "job.json"
    job.write_text(json.dumps({"matrix": [[2]], "task": "cosets"}))
    code, _, err = run_cli(capsys, "dilation", job)
    assert code == 2 and "job.task" in err
    job.write_text(json.dumps({"matrix": [[2]], "options": {"colour": 1}}))
    code, _, err = run_cli(capsys, "dilation", job)
    assert code == 2 and "job.options.colour" in err


def test_bad_monomial_path(tmp_path, capsys):
    job = tmp_path / "job.json"
    job.write_text(json.dumps({"matrix": [[2, 0], [0, 3]], "r": "1/12", "measure": {"haar": 2},
                               "monomials": [[[0, 0], 0, 0, [0, 0]], [[0, 0], -1, 0, [0, 0]]]}))
    code, _, err = run_cli(capsys, "eval", job)
    assert code == 2 and "job.monomials[1][1]" in err


def test_json_report_round_trip(tmp_path, capsys):
    job = GOLDEN / "jobs" / "kms_random.json"
    out = tmp_path / "report.json"
    code, _, _ = run_cli(capsys, "kms-check", job, "--json", str(out))
    assert code == 0
    report = cli.run("kms-check", json.loads(job.read_text()))
    assert json.loads(out.read_text()) == json.loads(json.dumps(report))


def test_same_seed_same_bytes(tmp_path, capsys):
    job = GOLDEN / "jobs" / "kms_random.json"
    outs = []
    for i in range(2):
        path = tmp_path / f"r{i}.json"
        run_cli(capsys, "kms-check", job, "--json", str(path), "--seed", "99")
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    run_cli(capsys, "kms-check", job, "--json", str(tmp_path / "other.json"), "--seed", "100")
    assert (tmp_path / "other.json").read_bytes() != outs[0]


def test_console_entry_point(tmp_path):
    job = GOLDEN / "jobs" / "dilation_two.json"
    proc = subprocess.run([sys.executable, "-m", "kmslat.cli", "dilation", "--job", str(job)],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("dilation: true")

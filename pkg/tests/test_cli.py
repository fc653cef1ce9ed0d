import csv
import io
import json
import subprocess
import sys

import pytest

from bdsfs.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


GENERATORS = [
    ("forward", "--T", "1.5", "--n", "3", "--nu", "1", "--reps", "3"),
    ("coalescent", "--T", "2", "--n", "5", "--nu", "1", "--reps", "3"),
    ("coalescent", "--T", "2", "--n", "5", "--newick"),
    ("contour", "--T", "1", "--reps", "5"),
    ("contour", "--T", "1", "--path"),
    ("approx", "--t-rule", "2", "--n", "50", "--reps", "3", "--k", "3"),
]


@pytest.mark.parametrize("argv", GENERATORS)
@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_generators_deterministic(capsys, argv, fmt):
    a = run(capsys, *argv, "--format", fmt, "--seed", "11")
    b = run(capsys, *argv, "--format", fmt, "--seed", "11")
    assert a[0] == 0 and a == b and a[1]
    if fmt == "json":
        json.loads(a[1])


def test_seed_changes_output(capsys):
    argv = ("coalescent", "--T", "2", "--n", "5", "--reps", "2")
    assert run(capsys, *argv, "--seed", "1")[1] != run(capsys, *argv, "--seed", "2")[1]


def test_workers_byte_identical(capsys):
    argv = ("coalescent", "--T", "2", "--n", "5", "--reps", "6")
    assert run(capsys, *argv)[1] == run(capsys, *argv, "--workers", "2")[1]


def test_forward_rows(capsys):
    _, out, _ = run(capsys, "forward", "--T", "1.5", "--n", "3", "--reps", "2")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["replicate"] for r in rows] == ["0", "0", "1", "1"]
    assert [r["k"] for r in rows] == ["1", "2", "1", "2"]


def test_moments_pass(capsys):
    code, out, _ = run(capsys, "moments")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 8
    assert list(rows[0]) == ["experiment", "statistic", "estimate", "target", "stderr", "p_value", "reps", "seed"]


def test_identity_json(capsys):
    code, out, _ = run(capsys, "identity", "--n", "6", "--format", "json")
    rows = json.loads(out)
    assert code == 0 and len(rows) == sum(n - 1 for n in range(2, 7))
    code, out, _ = run(capsys, "identity", "--n", "5", "--m", "2")
    assert code == 0 and "identity:m=2,n=5" in out


def test_statistical_failure_exit_2(capsys):
    code, out, _ = run(capsys, "clt", "--n", "200", "--t-rule", "clt", "--reps", "50", "--center", "0")
    assert code == 2 and "clt:R" in out


def test_lln_and_oracle(capsys):
    code, out, _ = run(capsys, "lln", "--n", "300", "--t-rule", "3", "--reps", "5")
    assert code in (0, 2) and "lln:k=2" in out
    code, out, _ = run(capsys, "oracle", "--n", "2", "--T", "1", "--reps", "200")
    assert code in (0, 2) and "oracle:forward-vs-coalescent" in out


def test_contour_compare(capsys):
    code, out, _ = run(capsys, "contour", "--T", "1", "--reps", "500", "--compare")
    assert code in (0, 2) and "contour:chi2" in out


@pytest.mark.parametrize(
    "argv",
    [
        ("bogus",),
        ("lln", "--n", "500", "--T", "1"),
        ("lln", "--n", "500"),
        ("coalescent", "--n", "3"),
        ("moments", "--lambda", "1", "--mu", "2"),
        ("forward", "--T", "1", "--reps", "0"),
        ("approx", "--t-rule", "2", "--n", "5", "--k", "7"),
        ("identity", "--n", "1"),
        ("lln", "--T", "1", "--t-rule", "2"),
        ("clt", "--t-rule", "nope"),
    ],
)
def test_usage_errors_exit_1(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        raise SystemExit(main(list(argv)))
    assert exc.value.code == 1


def test_out_file(tmp_path, capsys):
    target = tmp_path / "r.csv"
    code, out, _ = run(capsys, "moments", "--out", str(target))
    assert code == 0 and out == ""
    assert target.read_text().startswith("experiment,")


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "bdsfs", "identity", "--n", "3"], capture_output=True, text=True
    )
    assert res.returncode == 0 and res.stdout.count("\n") == 4

from __future__ import annotations

import csv
import json

import pytest

from hjbolza.cli import main


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_conjugate_single_costate(capsys):
    code, out, _ = _run(capsys, "conjugate", "--problem", "quadratic", "--p", "3")
    assert code == 0
    rows = list(csv.DictReader(out.splitlines()))
    assert float(rows[0]["H"]) == pytest.approx(4.5)


def test_conjugate_grid(capsys):
    code, out, _ = _run(capsys, "conjugate", "--problem", "quadratic", "--p-grid=-1:1:3")
    rows = list(csv.DictReader(out.splitlines()))
    assert [float(r["H"]) for r in rows] == pytest.approx([0.5, 0.0, 0.5])


def test_solve_arc(capsys):
    code, out, err = _run(capsys, "solve-arc", "--problem", "quadratic_x2", "--t", "1", "--x", "1")
    assert code == 0
    lines = out.splitlines()
    rows = list(csv.DictReader(line for line in lines if not line.startswith("#")))
    assert float(rows[-1]["y"]) == pytest.approx(1 / 3, abs=1e-4)
    assert lines[-1].startswith("# value=0.3333")


def test_solve_grid_writes_csv_sidecar_and_plot(tmp_path, capsys):
    out = tmp_path / "v.csv"
    plot = tmp_path / "v.dat"
    code, _, _ = _run(capsys, "solve-grid", "--problem", "quadratic_x2", "--nt", "4", "--box=-1:1", "--nx", "5",
                      "--out", str(out), "--emit-plot", str(plot))
    assert code == 0
    rows = list(csv.DictReader(out.read_text().splitlines()))
    assert len(rows) == 5 * 5
    assert rows[0] == {"t": "0.0", "x": "-1.0", "V": "1.0"}
    meta = json.loads((tmp_path / "v.csv.json").read_text())
    assert meta["problem"] == "quadratic_x2" and meta["grid"]["time_steps"] == 4
    assert plot.read_text().startswith("# t = 0.0")


def test_solve_grid_writes_inf_for_target_indicator(tmp_path, capsys):
    out = tmp_path / "ball.csv"
    _run(capsys, "solve-grid", "--problem", "lagrange_ball", "--nt", "2", "--box=-1:1", "--nx", "5", "--out", str(out))
    assert "inf" in out.read_text()


def test_nonsmooth_lower_derivative(capsys):
    code, out, _ = _run(capsys, "nonsmooth", "--problem", "quadratic_x2", "--point", "1,1",
                        "--direction=-1,-0.6666666667", "--mode", "dlow")
    data = json.loads(out)
    assert code == 0 and data["kind"] == "LowerContingent"
    assert data["value"] == pytest.approx(-2 / 9, abs=2e-3)


def test_nonsmooth_lplus(capsys):
    code, out, _ = _run(capsys, "nonsmooth", "--problem", "step", "--point", "0", "--direction=-1", "--mode", "lplus")
    assert json.loads(out)["value"] == pytest.approx(2**0.5, abs=1e-3)


@pytest.mark.parametrize("candidate,expected", [("-0.2222222222,0.6666666667", 0), ("0.3,0.6666666667", 1)])
def test_nonsmooth_membership_exit_code(capsys, candidate, expected):
    code, out, _ = _run(capsys, "nonsmooth", "--problem", "quadratic_x2", "--point", "1,1", "--mode", "subdiff",
                        f"--candidate={candidate}")
    assert code == expected
    assert json.loads(out)["verdict"] == ("pass" if expected == 0 else "fail")


def test_verify_counterexample_suite(tmp_path, capsys):
    report = tmp_path / "r.json"
    code, out, _ = _run(capsys, "verify", "--problem", "quadratic", "--suite", "counterexample", "--report", str(report))
    assert code == 0
    assert out.startswith("PASS counterexample")
    assert json.loads(report.read_text())["pass"] is True


@pytest.mark.parametrize(
    "argv",
    [
        ["conjugate", "--problem", "no_such_problem", "--p", "1"],
        ["conjugate", "--problem", "quadratic", "--p", "1,2"],
        ["solve-arc", "--problem", "quadratic", "--t", "1", "--x", "1,2"],
        ["nonsmooth", "--problem", "quadratic", "--point", "1,1", "--mode", "dlow"],
        ["nonsmooth", "--problem", "step_cross", "--point", "1,1", "--direction", "1,0", "--mode", "dlow"],
    ],
)
def test_bad_input_exits_with_code_two(capsys, argv):
    code, _, err = _run(capsys, *argv)
    assert code == 2
    assert err.startswith("error:")


def test_problem_file_is_accepted(tmp_path, capsys):
    path = tmp_path / "p.txt"
    path.write_text("name = f\ndimension = 1\nkinetic_power = 4\nkinetic_coef = 1\n")
    code, out, _ = _run(capsys, "conjugate", "--problem", str(path), "--p", "4")
    assert float(list(csv.DictReader(out.splitlines()))[0]["H"]) == pytest.approx(3.0)

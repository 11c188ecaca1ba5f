import json

import numpy as np
import pytest

from fraksolve.cli import main

MANUFACTURED = {
    "alpha": 3.5,
    "sigma": 0.5,
    "g": "manufactured",
    "lambda": 0.1,
    "tau": 1.0,
    "grid_points": 33,
    "quad_points": 48,
    "tol": 1e-10,
    "max_iters": 200,
    "enforce_cone": False,
}


@pytest.fixture
def manufactured_file(tmp_path):
    path = tmp_path / "problem.json"
    path.write_text(json.dumps(MANUFACTURED))
    return str(path)


def _read_csv(path):
    lines = path.read_text().strip().splitlines()
    header = lines[0]
    rows = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    return header, rows


def test_solve_manufactured_problem_file(manufactured_file, tmp_path, capsys):
    out = tmp_path / "run"
    code = main(["solve", manufactured_file, "--out", str(out)])
    assert code == 0
    header, rows = _read_csv(out / "solution.csv")
    assert header == "t,u"
    t, u = rows[:, 0], rows[:, 1]
    assert np.max(np.abs(u - t**2.5 * (1 - t) ** 2)) <= 1e-6
    header, trace = _read_csv(out / "trace.csv")
    assert header == "iter,delta"
    assert trace[0, 0] == 1.0
    cert = json.loads((out / "certificate.json").read_text())
    assert cert["verdict"] == "pass"
    pos = json.loads((out / "positivity.json").read_text())
    assert pos["verdict"] in ("verified positive", "not-verified")
    header, resid = _read_csv(out / "residual.csv")
    assert header == "t,residual"
    assert np.all(resid[:, 0] >= 0.2) and np.all(resid[:, 0] <= 0.8)


def test_solve_flags_override_file(manufactured_file, tmp_path):
    out = tmp_path / "run"
    code = main(["solve", manufactured_file, "--grid", "17", "--out", str(out)])
    assert code == 0
    _, rows = _read_csv(out / "solution.csv")
    assert len(rows) == 17


def test_solve_certificate_gate_exit_code(tmp_path):
    code = main(
        ["solve", "--alpha", "3.5", "--sigma", "0.5", "--g", "5*u",
         "--lambda", "500", "--tau", "1.0", "--out", str(tmp_path / "x")]
    )
    assert code == 2
    cert = json.loads((tmp_path / "x" / "certificate.json").read_text())
    assert cert["verdict"] == "fail"


def test_solve_bad_expression_exit_code(tmp_path, capsys):
    code = main(
        ["solve", "--alpha", "3.5", "--sigma", "0.5", "--g", "2+*3",
         "--lambda", "0.1", "--tau", "1.0", "--out", str(tmp_path / "x")]
    )
    assert code == 1
    assert "offset 2" in capsys.readouterr().err


def test_solve_malformed_json_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"alpha": 3.5,,}')
    code = main(["solve", str(bad), "--out", str(tmp_path / "x")])
    assert code == 1
    err = capsys.readouterr().err
    assert "char" in err or "column" in err  # position-bearing message


def test_solve_missing_fields_exit_code(tmp_path, capsys):
    code = main(["solve", "--alpha", "3.5", "--out", str(tmp_path / "x")])
    assert code == 1
    assert "missing" in capsys.readouterr().err


def test_solve_unknown_problem_key_rejected(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({**MANUFACTURED, "sigma_typo": 1}))
    assert main(["solve", str(bad), "--out", str(tmp_path / "x")]) == 1


def test_solve_non_convergence_exit_code(tmp_path):
    code = main(
        ["solve", "--alpha", "3.5", "--sigma", "0.5",
         "--g", "1 + 0.1*u/(1+1.0*sqrt(u))^2",
         "--lambda", "0.1", "--tau", "1.0", "--max-iters", "1",
         "--out", str(tmp_path / "x")]
    )
    assert code == 3
    assert (tmp_path / "x" / "trace.csv").exists()


def test_solve_artifacts_deterministic(manufactured_file, tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["solve", manufactured_file, "--seed", "3", "--out", str(out1)]) == 0
    assert main(["solve", manufactured_file, "--seed", "3", "--out", str(out2)]) == 0
    for name in ("solution.csv", "trace.csv", "certificate.json", "positivity.json", "residual.csv"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_solve_json_format_adds_copies(manufactured_file, tmp_path):
    out = tmp_path / "run"
    assert main(["solve", manufactured_file, "--format", "json", "--out", str(out)]) == 0
    assert (out / "solution.csv").exists()
    data = json.loads((out / "solution.json").read_text())
    assert len(data["t"]) == 33


def test_kernel_command(tmp_path, capsys):
    out = tmp_path / "k"
    code = main(["kernel", "--alpha", "4.0", "--sigma", "1e-8", "--grid", "17", "--out", str(out)])
    assert code == 0
    printed = capsys.readouterr().out
    n_printed = float(printed.split("N = ")[1].split(" at")[0])
    t_printed = float(printed.split("t_star = ")[1])
    assert abs(n_printed - 1.0 / 384.0) <= 1e-6
    assert abs(t_printed - 0.5) <= 1e-3
    header, rows = _read_csv(out / "green.csv")
    assert header == "t,s,G"
    assert len(rows) == 17 * 17
    edge = rows[(rows[:, 0] == 0.0) | (rows[:, 0] == 1.0)]
    assert np.all(edge[:, 2] == 0.0)
    header, lrows = _read_csv(out / "L.csv")
    assert header == "t,L_closed,L_quad"
    assert np.max(np.abs(lrows[:, 1] - lrows[:, 2])) <= 1e-8


def test_kernel_invalid_params(tmp_path):
    assert main(["kernel", "--alpha", "2.0", "--sigma", "0.5", "--out", str(tmp_path)]) == 1
    assert main(["kernel", "--alpha", "3.5", "--sigma", "1.5", "--out", str(tmp_path)]) == 1


def test_verify_default_passes(tmp_path):
    out = tmp_path / "v"
    assert main(["verify", "--out", str(out)]) == 0
    report = json.loads((out / "verify.json").read_text())
    assert report["passed"]
    assert all(c["passed"] for c in report["checks"])


def test_verify_fault_injection_fails(tmp_path):
    out = tmp_path / "v"
    assert main(["verify", "--perturb-kernel", "1e-3", "--out", str(out)]) == 4
    report = json.loads((out / "verify.json").read_text())
    failing = {c["name"] for c in report["checks"] if not c["passed"]}
    assert any("positivity" in name or "consistency" in name or "boundary" in name for name in failing)


def test_verify_deterministic_bytes(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["verify", "--seed", "7", "--out", str(out1)]) == 0
    assert main(["verify", "--seed", "7", "--out", str(out2)]) == 0
    assert (out1 / "verify.json").read_bytes() == (out2 / "verify.json").read_bytes()


def test_verify_suite_parallel_matches_serial():
    from fraksolve.cli import run_verify_suite

    serial = run_verify_suite(seed=5, threads=1)
    parallel = run_verify_suite(seed=5, threads=4)
    assert serial == parallel
    assert serial["passed"]

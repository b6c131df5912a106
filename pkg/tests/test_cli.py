import csv
import io
import json
import math
import subprocess
import sys

import pytest

from monosob import cli
from monosob.constants import sobolev_cp
from monosob.special import Weight


def run(argv, env=None):
    buf = io.StringIO()
    code = cli.main(argv, stream=buf, env=env or {})
    return code, buf.getvalue()


def jsonl(text):
    lines = [json.loads(s) for s in text.splitlines() if s]
    return lines[0]["header"], lines[1:]


def csv_body(text):
    head, _, rest = text.partition("\n")
    assert head.startswith("# ")
    return json.loads(head[2:])["header"], list(csv.DictReader(io.StringIO(rest)))


def test_constants_table_lines():
    code, out = run(["constants", "--A", "0,0", "--p", "1.5"])
    assert code == cli.EXIT_OK
    vals = dict(line.split(None, 1) for line in out.splitlines() if not line.startswith("#"))
    assert float(vals["pi_A"]) == pytest.approx(math.pi, rel=1e-11)
    assert float(vals["alpha_D"]) == pytest.approx(4 * math.pi, rel=1e-11)
    assert float(vals["Cp"]) == pytest.approx(sobolev_cp(Weight((0.0, 0.0)), 1.5), rel=1e-11)


def test_constants_half_pi():
    code, out = run(["constants", "--A", "1", "--format", "csv"])
    _, rows = csv_body(out)
    vals = {r["name"]: float(r["value"]) for r in rows}
    assert vals["pi_A"] == pytest.approx(0.5, rel=1e-14)


def test_header_contract_and_determinism():
    a = run(["check", "--ineq", "logsob", "--A", "1,2"])[1]
    b = run(["check", "--ineq", "logsob", "--A", "1,2"])[1]
    ha, body_a = jsonl(a)
    hb, body_b = jsonl(b)
    assert set(ha) == {"tool", "version", "timestamp", "config"}
    assert ha["tool"] == "monosob" and ha["config"]["A"] == [1.0, 2.0]
    assert a.splitlines()[1:] == b.splitlines()[1:]
    assert body_a[0]["verdict"] == "equality"


def test_fuzz_body_is_byte_identical():
    args = ["fuzz", "--ineq", "logsob", "--A", "1,0", "--trials", "5", "--seed", "7"]
    assert run(args)[1].splitlines()[1:] == run(args)[1].splitlines()[1:]


@pytest.mark.parametrize("argv", [
    ["constants", "--A", "1,x"],
    ["constants", "--A=-1,2"],
    ["check", "--ineq", "nope", "--A", "0"],
    ["check", "--ineq", "sobolev", "--A", "0,0", "--p", "5"],
    ["bogus"],
    ["check", "--format", "xml"],
])
def test_config_errors_exit_1(argv):
    assert run(argv)[0] == cli.EXIT_CONFIG


def test_accuracy_failure_exit_2(monkeypatch):
    from monosob import checkers as chk
    from monosob.errors import QuadratureAccuracyError

    def fail(*a, **k):
        raise QuadratureAccuracyError("stalled", value=1.25, error=0.1)

    monkeypatch.setattr(chk, "run_check", fail)
    code, out = run(["check", "--ineq", "logsob", "--A", "0.3,1.7"])
    assert code == cli.EXIT_ACCURACY
    _, body = jsonl(out)
    assert "accuracy_failure" in body[0] and "partial_value" in body[0]


def test_violation_exit_3(monkeypatch):
    from monosob import checkers as chk

    real = chk.run_check

    def fake(*a, **k):
        rep = real(*a, **k)
        rep.verdict = "violated-beyond-error"
        return rep

    monkeypatch.setattr(chk, "run_check", fake)
    assert run(["check", "--ineq", "logsob", "--A", "0"])[0] == cli.EXIT_VIOLATION


def test_ini_round_trip_and_flag_override(tmp_path):
    cfg = cli.RunConfig(command="sweep", A=(1.0, 1.0), ineq="logsob", sigma=(0.5, 1.0),
                        x0=((0.0, 0.0), (0.5, 0.5)), rel_tol=1e-9, fparams={"center": [0.0, 1.0]})
    back = cli.RunConfig.from_ini(cfg.to_ini())
    back.command = cfg.command
    assert back.to_dict() == cfg.to_dict()
    path = tmp_path / "run.ini"
    path.write_text(cfg.to_ini())
    _, out = run(["sweep", "--config", str(path)])
    head, rows = jsonl(out)
    assert head["config"]["sigma"] == [0.5, 1.0] and len(rows[0]["rows"]) == 4
    _, out = run(["sweep", "--config", str(path), "--sigma", "2", "--x0", "0,0"])
    head, rows = jsonl(out)
    assert head["config"]["sigma"] == [2.0] and len(rows[0]["rows"]) == 1


def test_precedence_env_file_flag(tmp_path):
    env = {"MONOSOB_TOL": "1e-7"}
    _, out = run(["check", "--ineq", "logsob", "--A", "0"], env)
    assert jsonl(out)[0]["config"]["rel_tol"] == 1e-7
    path = tmp_path / "c.ini"
    path.write_text("[quadrature]\nrel_tol = 1e-8\n")
    _, out = run(["check", "--config", str(path), "--ineq", "logsob", "--A", "0"], env)
    assert jsonl(out)[0]["config"]["rel_tol"] == 1e-8
    _, out = run(["check", "--config", str(path), "--tol", "1e-9", "--ineq", "logsob", "--A", "0"], env)
    assert jsonl(out)[0]["config"]["rel_tol"] == 1e-9
    assert run(["check", "--ineq", "logsob", "--A", "0"], {"MONOSOB_TOL": "tight"})[0] == cli.EXIT_CONFIG


def test_sweep_csv_deficits():
    code, out = run(["sweep", "--ineq", "logsob", "--A", "0,0,0", "--format", "csv",
                     "--x0", "0,0,0", "--x0", "1,-1,0.5"])
    assert code == cli.EXIT_OK
    _, rows = csv_body(out)
    assert len(rows) == 18
    assert max(abs(float(r["deficit"])) for r in rows) <= 1e-6


def test_sweep_extremal():
    code, out = run(["sweep", "--ineq", "sobolev", "--A", "1,1", "--p", "2", "--family", "extremal"])
    assert code == cli.EXIT_OK
    _, rows = jsonl(out)
    assert max(r["rel_deficit"] for r in rows[0]["rows"]) <= 1e-6


def test_asymptotics_command(tmp_path):
    out_path = tmp_path / "a.csv"
    code, _ = run(["asymptotics", "--A", "2,1,0", "--lmax", "1000000", "--format", "csv", "--out", str(out_path)])
    assert code == cli.EXIT_OK
    _, rows = csv_body(out_path.read_text())
    assert int(rows[-1]["l"]) == 10**6
    assert float(rows[-1]["rel_error"]) < 1e-4


def test_fuzz_and_identities_commands():
    code, out = run(["fuzz", "--ineq", "heisenberg", "--A", "1,2", "--trials", "10"])
    assert code == cli.EXIT_OK
    _, body = jsonl(out)
    assert body[0]["summary"]["violations"] == 0 and len(body) == 11
    code, out = run(["identities", "--cases", "20"])
    assert code == cli.EXIT_OK
    assert all(r["pass"] for r in jsonl(out)[1])


def test_non_finite_values_serialize_as_strings():
    assert json.loads(cli.dumps({"x": math.inf, "y": [math.nan, 1.5]})) == {"x": "inf", "y": ["nan", 1.5]}
    assert cli.fmt12(1 / 3) == "0.333333333333"


def test_entry_point_subprocess():
    proc = subprocess.run([sys.executable, "-m", "monosob.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "monosob" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "monosob.cli", "constants", "--A", "a"],
                          capture_output=True, text=True)
    assert proc.returncode == 1 and "error" in proc.stderr


def test_documented_example_config_loads():
    import pathlib

    path = pathlib.Path(__file__).resolve().parents[1] / "docs" / "examples" / "sweep_logsob.ini"
    code, out = run(["sweep", "--config", str(path)])
    assert code == cli.EXIT_OK
    head, rows = csv_body(out)
    assert head["config"]["x0"] == [[0.0, 0.0], [0.5, 0.5]] and len(rows) == 18

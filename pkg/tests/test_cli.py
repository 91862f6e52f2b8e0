import csv
import io
import json
import math
import shutil
import subprocess
from fractions import Fraction

import pytest

from monopole_moduli import cli
from monopole_moduli.config import Config, ConfigError, resolve


def run(argv, env=None, monkeypatch=None):
    out = io.StringIO()
    code = cli.main(argv, out=out)
    return code, out.getvalue()


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


# eval ----------------------------------------------------------------------------------


def test_eval_j_at_i():
    code, out = run(["eval", "j", "--tau", "1.0"])
    assert code == 0
    assert abs(float(rows(out)[0]["value"]) - 1728) < 1e-6


def test_eval_series():
    code, out = run(["eval", "E4", "--series", "--order", "3"])
    assert code == 0 and out.strip() == "0:1, 1:240, 2:2160"


def test_eval_I_near_cusp_reports_deviation():
    code, out = run(["eval", "I", "--tau", "10"])
    r = rows(out)[0]
    assert code == 0 and abs(float(r["value"]) - 1) < 1e-12
    assert -1e-20 < float(r["deviation_from_1"]) < 0


def test_eval_insufficient_order_exit_3(capsys):
    code, _ = run(["eval", "j", "--tau", "1", "--order", "3"])
    assert code == 3
    assert "truncation" in capsys.readouterr().err


def test_eval_usage_errors():
    assert run(["eval", "E4"])[0] == 2
    assert run(["eval", "E5", "--tau", "1"])[0] == 2
    assert run(["eval", "g2", "--series"])[0] == 2
    assert run(["bogus"])[0] == 2


def test_eval_json():
    code, out = run(["eval", "E4", "--tau", "1", "--format", "json"])
    data = json.loads(out)
    assert code == 0 and isinstance(data, list) and set(data[0]) == {"target", "tau", "value"}


# audit ---------------------------------------------------------------------------------


def test_audit_disguise_r():
    code, out = run(["audit", "disguise-r", "--n", "100", "--seed", "7"])
    data = json.loads(out)
    assert code == 0 and data["worst_residual"] < 1e-10 and data["seed"] == 7
    assert data["notes"]


def test_audit_selfdual_reports_orientation():
    code, out = run(["audit", "selfdual", "--explain"])
    data = json.loads(out)
    assert code == 0 and data["orientation"] == "-" and data["worst_residual"] == 0
    assert data["plus_orientation_min_residual"] > 0 and "explanation" in data


def test_audit_morphism():
    code, out = run(["audit", "morphism", "--n", "50"])
    assert code == 0 and json.loads(out)["worst_residual"] == 0


@pytest.mark.parametrize("name", ["disguise-h", "group", "ramanujan-exact", "halphen-theta"])
def test_other_audits_pass(name):
    code, out = run(["audit", name, "--n", "20"])
    assert code == 0 and json.loads(out)["passed"]


def test_audit_failure_exit_1():
    # an impossible tolerance turns a passing audit into a failed one
    code, out = run(["audit", "disguise-h", "--n", "5", "--tol", "1e-30"])
    assert code == 1 and not json.loads(out)["passed"]


# curve ---------------------------------------------------------------------------------


def test_curve_from_r():
    code, out = run(["curve", "--r1", "3", "--r2", "9"])
    r = rows(out)[0]
    assert code == 0
    assert (r["g2"], r["g3"], r["disc"], r["I"]) == ("16", "12", "208", "243/256")
    assert float(r["rho"]) > 1


def test_curve_from_rho():
    code, out = run(["curve", "--rho", "5"])
    assert code == 0 and abs(float(rows(out)[0]["r2"]) - math.pi**2 / 4) < 1e-3


def test_curve_degenerate(capsys):
    code, _ = run(["curve", "--r1", "0", "--r2", "2.4674"])
    assert code == 2
    assert "degenerate: two k=1 curves η = ±i√r2 ζ" in capsys.readouterr().err


def test_curve_usage():
    assert run(["curve", "--r1", "1"])[0] == 2
    assert run(["curve", "--rho", "2", "--r1", "1", "--r2", "1"])[0] == 2
    assert run(["curve", "--r1", "x", "--r2", "1"])[0] == 2


# metric --------------------------------------------------------------------------------


def test_metric_csv():
    code, out = run(["metric", "--rho-min", "1", "--rho-max", "3", "--steps", "5"])
    table = rows(out)
    assert code == 0 and len(table) == 5
    assert list(table[0]) == list(cli.METRIC_COLUMNS)
    for r in table:
        assert all(abs(float(r[f"selfdual{i}"])) < 1e-8 for i in (1, 2, 3))
    at2 = [r for r in table if float(r["rho"]) == 2][0]
    assert abs(float(at2["b2_over_c2"]) - 1) < 0.05


def test_metric_json_matches_csv():
    _, c = run(["metric", "--rho-min", "1", "--rho-max", "2", "--steps", "3"])
    _, j = run(["metric", "--rho-min", "1", "--rho-max", "2", "--steps", "3", "--format", "json"])
    data = json.loads(j)
    assert [list(d) for d in data] == [list(cli.METRIC_COLUMNS)] * 3
    for d, r in zip(data, rows(c)):
        assert all(float(r[k]) == d[k] for k in cli.METRIC_COLUMNS)


def test_metric_usage():
    assert run(["metric", "--rho-min", "3", "--rho-max", "1"])[0] == 2
    assert run(["metric", "--rho-min", "1", "--rho-max", "2", "--steps", "0"])[0] == 2


def test_metric_signature_obstruction_exit_3(monkeypatch, capsys):
    from monopole_moduli import monopole
    monkeypatch.setattr(monopole, "omega_from_theta",
                        lambda rho, order=None: monopole.OmegaPoint(-1.0, 2.0, 4.0, rho))
    code, _ = run(["metric", "--rho-min", "1", "--rho-max", "2", "--steps", "2"])
    assert code == 3 and "signature" in capsys.readouterr().err


def test_metric_collision_near_zero_exit_3(capsys):
    code, _ = run(["metric", "--rho-min", "0.05", "--rho-max", "0.1", "--steps", "2",
                   "--order", "400"])
    assert code == 3 and "distinct" in capsys.readouterr().err


# flow ----------------------------------------------------------------------------------


def test_flow_R():
    code, out = run(["flow", "R", "--from-tau", "2", "--to", "1.2", "--tol", "1e-8"])
    r = rows(out)[0]
    assert code == 0 and float(r["endpoint_error"]) < 1e-6 and r["status"] == "ok"


def test_flow_omega():
    code, out = run(["flow", "omega", "--from", "1.0", "--to", "2.0", "--format", "json"])
    assert code == 0 and json.loads(out)["endpoint_error"] < 1e-6


def test_flow_H_explicit_start_completes_or_reports(capsys):
    code, out = run(["flow", "H", "--start", "0,1,-1", "--to", "0.2"])
    assert code in (0, 1) and out
    code, _ = run(["flow", "H", "--start", "0,1,-1", "--to", "5"])
    assert code == 1 and "last good sample" in capsys.readouterr().err


def test_flow_trajectory_and_usage():
    code, out = run(["flow", "omega", "--from", "1", "--to", "1.2", "--trajectory"])
    assert code == 0 and len(rows(out)) > 2
    assert run(["flow", "R", "--to", "1"])[0] == 2
    assert run(["flow", "R", "--start", "1,2", "--to", "1"])[0] == 2


# config and determinism ---------------------------------------------------------------


def test_config_layering(tmp_path, monkeypatch):
    f = tmp_path / "run.conf"
    f.write_text("# comment\norder = 20\ntol = 1e-9\nprecision = 8\n")
    monkeypatch.setenv("MONOPOLE_MODULI_TOL", "1e-7")
    cfg = resolve(f, {"precision": 10, "seed": None})
    assert cfg == Config(order=Fraction(20), tol=1e-7, precision=10)
    assert resolve(None, {}, environ={}) == Config()


def test_config_validation(tmp_path):
    with pytest.raises(ConfigError):
        Config(precision=3)
    with pytest.raises(ConfigError):
        Config(tol=0)
    bad = tmp_path / "bad.conf"
    bad.write_text("colour = red\n")
    with pytest.raises(ConfigError):
        resolve(bad)
    assert run(["eval", "E4", "--tau", "1", "--config", str(bad)])[0] == 2
    assert run(["eval", "E4", "--tau", "1", "--precision", "2"])[0] == 2


def test_precision_flag():
    _, out = run(["eval", "E4", "--tau", "1", "--precision", "6"])
    assert rows(out)[0]["value"] == "1.45576"


def test_output_is_deterministic():
    argv = ["audit", "group", "--n", "10", "--seed", "3"]
    assert run(argv) == run(argv)
    argv = ["metric", "--rho-min", "1", "--rho-max", "2", "--steps", "4"]
    assert run(argv) == run(argv)


def test_console_script():
    exe = shutil.which("monopole-moduli")
    if exe is None:
        pytest.skip("package not installed")
    p = subprocess.run([exe, "curve", "--r1", "3", "--r2", "9"], capture_output=True, text=True)
    assert p.returncode == 0 and "243/256" in p.stdout

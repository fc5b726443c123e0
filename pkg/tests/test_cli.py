import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from wirtinger.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_constant_classical(capsys):
    code, out, _ = run(capsys, "constant", "--p", "2", "--q", "2", "--r", "2")
    data = json.loads(out)
    assert code == 0
    assert data["lambda_w"] == pytest.approx(math.pi, abs=1e-8)
    assert data["lambda_p"] == pytest.approx(math.pi, abs=1e-8)
    assert data["class"] == "Symmetric"


def test_constant_asymmetric(capsys):
    code, out, _ = run(capsys, "constant", "--p", "2", "--q", "8", "--r", "2")
    data = json.loads(out)
    assert code == 0 and data["class"] == "Asymmetric"
    assert data["lambda_w"] < data["lambda_p"]


def test_constant_domain_error(capsys):
    code, _, err = run(capsys, "constant", "--p", "0.5", "--q", "2", "--r", "2")
    assert code == 2 and "DomainError" in err


def test_missing_exponent_is_input_error(capsys):
    code, _, err = run(capsys, "constant", "--p", "2", "--q", "2")
    assert code == 2 and "--r" in err


def test_constant_csv(capsys):
    code, out, _ = run(capsys, "constant", "--p", "2", "--q", "4", "--r", "2", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and rows[0]["class"] == "Symmetric"


def test_jscan(capsys):
    code, out, _ = run(capsys, "jscan", "--p", "2", "--q", "2", "--r", "2", "--mu-max", "2", "--grid", "5")
    rows = json.loads(out)["rows"]
    assert code == 0 and len(rows) == 5
    for row in rows:
        assert row["j"] == pytest.approx(math.pi / 2 * (1 + row["mu"] ** 2 / 4), rel=1e-12)
        assert row["j_prime"] == pytest.approx(math.pi / 4 * row["mu"], rel=1e-9, abs=1e-12)


def test_profile_csv_matches_sine(capsys, tmp_path):
    path = tmp_path / "prof.csv"
    code, out, _ = run(capsys, "profile", "--p", "2", "--q", "2", "--r", "2", "--points", "101", "--output", str(path))
    assert code == 0 and out == ""
    rows = list(csv.DictReader(open(path, encoding="utf-8")))
    assert len(rows) == 101 and list(rows[0]) == ["x", "u_p", "u_w"]
    x = np.array([float(r["x"]) for r in rows])
    assert np.max(np.abs(np.array([float(r["u_w"]) for r in rows]) - np.sin(x))) < 1e-8
    assert np.max(np.abs(np.array([float(r["u_p"]) for r in rows]) - np.cos(x))) < 1e-8


def test_verify_identities(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "identities")
    data = json.loads(out)
    assert code == 0 and data["passed"]
    for check in data["suites"][0]["checks"]:
        if check["check"] == "moment_identity":
            assert max(check["residual_q"], check["residual_p"]) <= 1e-8


def test_verify_symmetry(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "symmetry", "--p", "2", "--q", "5", "--r", "2")
    assert code == 0 and json.loads(out)["passed"]


def test_verify_reports_failing_tuple(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "asymmetry", "--p", "2", "--q", "5", "--r", "2")
    data = json.loads(out)
    assert code == 1 and not data["passed"]
    assert data["failures"][0]["params"] == {"p": 2.0, "q": 5.0, "r": 2.0}


def test_verify_asymmetry(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "asymmetry", "--p", "2", "--q", "8", "--r", "2")
    data = json.loads(out)
    assert code == 0
    sign = [c for c in data["suites"][0]["checks"] if c["check"] == "perturbation_sign"][0]
    assert sign["fitted_c"] < 0


def test_perturb(capsys):
    code, out, _ = run(capsys, "perturb", "--p", "2", "--q", "8", "--r", "2")
    data = json.loads(out)
    assert code == 0
    assert set(data) >= {"params", "eps_list", "fitted_c", "predicted_c", "relative_error"}
    assert data["relative_error"] <= 0.05


def test_perturb_piecewise(capsys):
    code, out, _ = run(capsys, "perturb", "--p", "2", "--q", "10", "--r", "2", "--variant", "piecewise")
    assert code == 0 and json.loads(out)["fitted_c"] == pytest.approx(-1.5, rel=1e-3)


def test_perturb_bad_eps(capsys):
    code, _, _ = run(capsys, "perturb", "--p", "2", "--q", "8", "--r", "2", "--eps", "0.7", "0.1", "0.05")
    assert code == 2


def test_oracle(capsys, tmp_path):
    upath = tmp_path / "u.csv"
    code, out, _ = run(capsys, "oracle", "--p", "2", "--q", "2", "--r", "2", "--n", "400", "--seed", "7", "--u-output", str(upath))
    data = json.loads(out)
    assert code == 0 and abs(data["lambda_est"] - math.pi) <= 1e-2
    assert set(data) == {"params", "n", "lambda_est", "lambda_jfun", "rel_diff"}
    assert len(open(upath, encoding="utf-8").read().splitlines()) == 402


def test_region_scan_single_cell(capsys):
    code, out, _ = run(capsys, "region-scan", "--p", "2", "--q", "2", "--r", "2", "--threads", "1")
    data = json.loads(out)
    assert code == 0
    (row,) = data["rows"]
    assert row["agree"] and row["observed"] == "Symmetric"


def test_region_scan_csv_and_resume(capsys, tmp_path):
    args = ["region-scan", "--r", "2", "--p-range", "1.5", "3", "--q-range", "3", "9", "--steps", "3", "4", "1", "--format", "csv", "--threads", "1"]
    code, full, _ = run(capsys, *args)
    assert code == 0 and full.startswith("index,p,q,r,mu_star")
    assert full.rstrip().splitlines()[-1].startswith("# agree")
    ck = tmp_path / "ck.jsonl"
    run(capsys, *args, "--resume", str(ck))
    lines = ck.read_text(encoding="utf-8").splitlines()
    ck.write_text("\n".join(lines[:5]) + "\n", encoding="utf-8")
    code, resumed, _ = run(capsys, *args, "--resume", str(ck))
    assert code == 0 and resumed == full


def test_region_scan_bad_range(capsys):
    code, _, _ = run(capsys, "region-scan", "--r", "2", "--q", "3", "--p-range", "0.5", "3")
    assert code == 2


def test_unwritable_output(capsys, tmp_path):
    code, _, _ = run(capsys, "constant", "--p", "2", "--q", "2", "--r", "2", "--output", str(tmp_path / "missing" / "x.json"))
    assert code == 2


def test_json_is_byte_identical(capsys):
    argv = ["oracle", "--p", "3", "--q", "4", "--r", "1.5", "--n", "100", "--seed", "3"]
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "wirtinger", "constant", "--p", "2", "--q", "2", "--r", "2"], capture_output=True, text=True, check=True)
    assert json.loads(res.stdout)["mu_star"] == 0

import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from rscap import lemmas
from rscap.cli import CSV_HEADER, EXIT_NUMERICAL, EXIT_USAGE, EXIT_VIOLATED, dumps, run
from rscap.lemmas import Condition, REGISTRY

ENV = {}


def cli(*argv, environ=None):
    return run(list(argv), environ=ENV if environ is None else environ)


def roundtrips(text):
    return dumps(json.loads(text)) + "\n" == text


def test_solve_json():
    code, out, err = cli("solve", "--kappa", "0", "--alpha", "0.5", "--format", "json")
    assert code == 0 and err == ""
    d = json.loads(out)
    assert list(d) == ["kappa", "alpha", "solved", "q", "r", "rs_value", "residual_q", "residual_r"]
    assert d["solved"] is True
    np.testing.assert_allclose(d["q"], 0.3223853632228314, rtol=1e-9)
    assert roundtrips(out)


def test_solve_no_solution_is_exit_zero():
    code, out, _ = cli("solve", "--kappa", "0", "--alpha", "1.3", "--format", "json")
    d = json.loads(out)
    assert code == 0 and d["solved"] is False and d["q"] is None


def test_solve_human():
    code, out, _ = cli("solve", "--kappa", "0", "--alpha", "0.5")
    assert code == 0 and "rs_value" in out


def test_capacity_json():
    code, out, _ = cli("capacity", "--kappa", "0", "--format", "json")
    d = json.loads(out)
    assert list(d) == ["kappa", "alpha_c", "alpha_star", "alpha_star_reason", "bracket_width"]
    assert abs(d["alpha_c"] - 1.2732395447351628) < 1e-12
    assert 0.830 <= d["alpha_star"] <= 0.836
    assert roundtrips(out)


def test_sweep_csv(tmp_path):
    code, out, _ = cli("sweep", "--kappa", "0", "--alpha-min", "1.0", "--alpha-max", "1.4", "--steps", "5")
    assert code == 0
    assert "\r" not in out
    rows = list(csv.reader(io.StringIO(out)))
    assert tuple(rows[0]) == CSV_HEADER
    assert len(rows) == 6
    assert rows[-1] == ["1.4", "", "", "", "false", "", ""]
    target = tmp_path / "s.csv"
    code, out2, _ = cli("sweep", "--kappa", "0", "--alpha-min", "1.0", "--alpha-max", "1.4",
                        "--steps", "5", "--out", str(target))
    assert code == 0 and out2 == ""
    assert target.read_bytes() == out.encode()


def test_sweep_json_roundtrip():
    code, out, _ = cli("sweep", "--kappa", "1", "--alpha-min", "0.1", "--alpha-max", "0.4",
                       "--steps", "3", "--format", "json")
    assert code == 0 and roundtrips(out)
    assert [r["solved"] for r in json.loads(out)] == [True, True, False]


def test_sweep_jobs_identical():
    base = ("sweep", "--kappa", "0", "--alpha-min", "0.2", "--alpha-max", "1.3", "--steps", "6")
    assert cli(*base) == cli(*base, "--jobs", "3")


def test_verify_json():
    code, out, _ = cli("verify", "--lemma", "pi_estimate", "--resolution", "100", "--format", "json")
    d = json.loads(out)
    assert code == 0 and d["passed"] and d["note"] == "numerical evidence, not proof"
    assert roundtrips(out)


def test_verify_violation_exit_3(monkeypatch):
    def broken(n, cfg):
        return "one point", [Condition("always negative", np.zeros((1, 1)), lambda p: p[:, 0] - 1)]

    monkeypatch.setitem(REGISTRY, "perturbed", lemmas.Check("perturbed", 1e-12, "perturbed", broken))
    code, out, _ = cli("verify", "--lemma", "perturbed", "--resolution", "100")
    assert code == EXIT_VIOLATED and out.startswith("FAIL")


@pytest.mark.parametrize("argv", [
    ("solve", "--kappa", "-1", "--alpha", "0.5"),
    ("solve", "--kappa", "0"),
    ("solve", "--kappa", "0", "--alpha", "0.5", "--format", "csv"),
    ("verify", "--lemma", "nope"),
    ("verify", "--lemma", "all", "--resolution", "50"),
    ("sweep", "--kappa", "0", "--alpha-min", "0.5", "--alpha-max", "0.4", "--steps", "3"),
    ("bogus",),
])
def test_usage_errors(argv):
    code, out, err = cli(*argv)
    assert code == EXIT_USAGE and out == "" and err


def test_environment_precedence():
    code, _, err = cli("solve", "--kappa", "0", "--alpha", "0.5", environ={"RSCAP_QUAD_NODES": "1"})
    assert code == EXIT_USAGE and "quad_nodes" in err
    # the flag wins over the environment
    code, _, _ = cli("solve", "--kappa", "0", "--alpha", "0.5", "--quad-nodes", "101",
                     environ={"RSCAP_QUAD_NODES": "1"})
    assert code == 0


def test_numerical_error_exit_4():
    code, out, err = cli("solve", "--kappa", "0", "--alpha", "1.25", environ={"RSCAP_MAX_BRACKET": "4"})
    assert code == EXIT_NUMERICAL and out == "" and "numerical" in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "rscap", "solve", "--kappa", "0", "--alpha", "0.5",
                           "--format", "json"], capture_output=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["solved"] is True

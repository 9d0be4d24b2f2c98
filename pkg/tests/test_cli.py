import json
import subprocess
import sys

import pytest

from udfq.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_classify_json(capsys):
    code, out, _ = run(capsys, "classify", "--algebra", "jordan1", "--w", "A^X", "--json")
    data = json.loads(out)
    assert code == 0
    assert data["tag"] == "Case1-s!=d-nonsemisimple" and data["lambda"] == "1"


def test_star_formal_coefficients(capsys):
    code, out, _ = run(capsys, "star-formal", "--u", "x0", "--v", "x1", "--order", "2", "--json")
    coeffs = {c["order"]: c["expr"] for c in json.loads(out)["coefficients"]}
    assert code == 0 and coeffs == {0: "x0*x1", 1: "-1/2*I", 2: "0"}


def test_smash_ordering(capsys):
    code, out, _ = run(capsys, "smash", "--u", "x@1", "--v", "1@X0", "--lambda", "1", "--json")
    assert code == 0
    assert json.loads(out)["product"] == "(x) ⊗ X0 + (1)*t^1 ⊗ 1"


def test_star_strict_small_hbar(capsys):
    code, out, _ = run(capsys, "star-strict", "--u", "gauss(a;0,1)*gauss(l;0,1)",
                       "--v", "gauss(a;0,1)*gauss(l;0,1)", "--hbar", "0.2", "--json")
    data = json.loads(out)
    assert code == 0
    assert data["value_re"] == pytest.approx(1.0, abs=0.05)


def test_dress_apply_identity(capsys):
    code, out, _ = run(capsys, "dress", "--g", "a=0,v=0,0", "--k", "quat=0,1,0,0", "--json")
    assert code == 0
    assert json.loads(out)["tau_g_k"] == json.loads(out)["k"]


def test_usage_errors_exit_two(capsys):
    assert run(capsys, "no-such-command")[0] == 2
    assert run(capsys)[0] == 2
    assert run(capsys, "verify", "--json", "--csv")[0] == 2
    code, _, err = run(capsys, "classify", "--algebra", "heisenberg", "--w", "X^Y")
    assert code == 2 and "NotSubalgebra" in err


def test_verify_is_deterministic(capsys):
    args = ("verify", "--suite", "dressing", "--json", "--no-timing", "--seed", "3")
    first = run(capsys, *args)
    second = run(capsys, *args)
    assert first[0] == 0 and first[1] == second[1]
    report = json.loads(first[1])
    assert report["all_passed"] and report["seed"] == 3
    assert all("runtime_ms" not in c for c in report["checks"])


def test_verify_csv(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "algebra", "--csv")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0].startswith("name,status") and len(lines) == 3


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "udfq", "verify", "--suite", "algebra"], capture_output=True, text=True)
    assert r.returncode == 0 and "2/2 passed" in r.stdout

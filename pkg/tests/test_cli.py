import json
import shutil
import subprocess

import pytest

from shalika.cli import run_command


def test_hecke_reps_count():
    code, out = run_command(["hecke", "reps", "--r", "2", "--f", "1,0", "--p", "2"])
    assert code == 0
    assert out["count"] == 3 == len(out["reps"])


def test_essential_support_at_reference_point():
    code, out = run_command(["essential", "support", "--p", "3", "--e", "1"])
    assert code == 0 and out["in_support"] is True


@pytest.mark.parametrize("a,zero", [("1", True), ("1/3", False), ("1/9", False)])
def test_gauss_support(a, zero):
    code, out = run_command(["gauss", "--p", "3", "--e", "1", "--a", a])
    assert code == 0
    assert (out["value"] == "0") == zero


@pytest.mark.parametrize("argv,code", [
    (["bogus"], 2),
    (["gauss", "--p", "4"], 2),
    (["gauss", "--p", "2", "--e", "1"], 2),
    (["verify", "gauss", "--p", "3", "--e", "1"], 1),
    (["verify", "bmk"], 0),
    (["cosets", "bmk", "--p", "2", "--kmax", "2"], 0),
])
def test_exit_codes(argv, code):
    assert run_command(argv)[0] == code


def test_env_var_sets_prime(monkeypatch):
    monkeypatch.setenv("SHALIKA_P", "5")
    code, out = run_command(["hecke", "reps", "--r", "2", "--f", "1,0"])
    assert code == 0 and out["config"]["p"] == 5 and out["count"] == 6


@pytest.mark.skipif(shutil.which("shalika") is None, reason="console script not installed")
def test_console_script_output_is_byte_stable():
    argv = ["shalika", "verify", "hecke"]
    a = subprocess.run(argv, capture_output=True, check=True).stdout
    b = subprocess.run(argv, capture_output=True, check=True).stdout
    assert a == b
    assert json.loads(a)["status"] == "PASS"

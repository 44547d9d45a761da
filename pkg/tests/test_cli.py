import json
import subprocess
import sys

import pytest

from modkron.cli import EXIT_ERROR, EXIT_FAIL, EXIT_PASS, RunConfig, main, run


def call(argv, capsys):
    status = main(argv)
    out = capsys.readouterr()
    return status, out.out, out.err


def test_expand_j(capsys):
    status, out, _ = call(["expand", "j", "--prec", "4"], capsys)
    assert status == EXIT_PASS
    assert out.splitlines()[0] == "q^-1 + 744 + 196884*q + 21493760*q^2 + O(q^3)"
    assert "leading exponent: -1" in out


def test_expand_eta_and_fricke(capsys):
    _, out, _ = call(["expand", "eta(2^24 * 1^-24)", "--prec", "3"], capsys)
    assert out.splitlines()[0] == "q + 24*q^2 + O(q^3)"
    status, out, _ = call(["expand", "--f", "fricke(2,0,1)", "--prec", "3"], capsys)
    assert status == EXIT_PASS and "leading exponent: -1" in out


def test_expand_unknown_function(capsys):
    status, _, err = call(["expand", "k"], capsys)
    assert status == EXIT_ERROR and err.startswith("error:")


def test_verify_passes(capsys):
    status, out, _ = call(["verify", "--f", "j", "--N", "1", "--p", "2", "--mode", "all-cosets",
                           "--prec", "20"], capsys)
    assert status == EXIT_PASS and out.rstrip().endswith("verdict: pass")
    status, out, _ = call(["verify", "--f", "fricke(3,1,0)", "--N", "3", "--p", "2",
                           "--mode", "all-cosets", "--prec", "20"], capsys)
    assert status == EXIT_PASS and "cusps checked: 144" in out


def test_verify_refuses_without_override(capsys):
    status, _, err = call(["verify", "--f", "fricke(5,0,1)", "--N", "5", "--p", "3"], capsys)
    assert status == EXIT_ERROR and "--negative-control" in err
    status, out, _ = call(["verify", "--f", "fricke(5,0,1)", "--N", "5", "--p", "3",
                           "--negative-control", "--prec", "10"], capsys)
    assert status == EXIT_PASS and "observational" in out


def test_verify_structured_echoes_seed(capsys):
    status, out, _ = call(["verify", "--f", "fricke(5,0,1)", "--N", "5", "--p", "11",
                           "--mode", "sampled", "--sample", "3", "--seed", "9", "--prec", "5",
                           "--format", "structured"], capsys)
    doc = json.loads(out)
    assert set(doc) == {"command", "config", "result", "timing_ms"}
    assert doc["result"]["seed"] == 9 and doc["config"]["seed"] == 9
    assert doc["result"]["verdict"] == "pass" and status == EXIT_PASS


def test_exit_status_follows_verdict():
    # a failing report maps to EXIT_FAIL; a fake verdict is injected through run()
    from modkron import cli
    from modkron.kronecker import CongruenceReport

    real = cli.verify_congruence
    try:
        cli.verify_congruence = lambda *a, **k: CongruenceReport(1, 2, "j", "cusp-infinity",
                                                                  [], "fail", 5)
        _, status = run(RunConfig(command="verify", function="j", N=1, p=2))
        assert status == EXIT_FAIL
    finally:
        cli.verify_congruence = real


def test_modpoly(capsys):
    status, out, _ = call(["modpoly", "--p", "2"], capsys)
    assert status == EXIT_PASS
    assert "nonzero coefficients: 11 (7 up to symmetry)" in out
    assert "Kronecker check: true" in out
    status, out, _ = call(["modpoly", "--p", "3"], capsys)
    assert status == EXIT_PASS and "Kronecker check: true" in out
    status, _, err = call(["modpoly", "--p", "7"], capsys)
    assert status == EXIT_ERROR and "not supported" in err


def test_valuation(capsys):
    status, out, _ = call(["valuation", "--p", "11", "--N", "5", "--element", "z + 2"], capsys)
    assert status == EXIT_PASS
    lines = out.splitlines()
    assert lines[0] == "primes above 11 in Q(zeta_5): 4 of residue degree 1"
    assert "(11, x + 2)  v_P=1" in out
    assert sum("v_P=0" in line for line in lines) == 3
    _, out, _ = call(["valuation", "--p", "3", "--N", "4", "--f", "delta"], capsys)
    assert "w_P=0" in out


def test_integrality(capsys):
    status, out, _ = call(["integrality", "--f", "fricke(2,0,1)"], capsys)
    assert status == EXIT_PASS and "integral coefficients: true" in out
    status, out, _ = call(["integrality", "--f", "j", "--p", "2"], capsys)
    assert status == EXIT_PASS and "x^1: 1488*j^2 + 40773375*j + 8748000000" in out


def test_out_file(tmp_path, capsys):
    target = tmp_path / "report.json"
    status = main(["modpoly", "--p", "2", "--format", "structured", "--out", str(target)])
    assert status == EXIT_PASS and capsys.readouterr().out == ""
    doc = json.loads(target.read_text())
    assert doc["command"] == "modpoly" and doc["result"]["kronecker_check"] is True


def test_config_validation():
    with pytest.raises(ValueError):
        run(RunConfig(command="expand", function="j", precision=0))
    with pytest.raises(ValueError):
        run(RunConfig(command="verify", function="j", N=1, p=4))


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "modkron", "expand", "j", "--prec", "2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and proc.stdout.startswith("q^-1 + 744 + O(q)")

from __future__ import annotations

import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from pdo import __version__
from pdo.cli import main

ROOT = Path(__file__).resolve().parent.parent
INPUTS = ROOT / "inputs"
GOLDEN = Path(__file__).resolve().parent / "golden"

CASES = {
    "commute": ["commute", str(INPUTS / "example_ops.txt"), "--precision", "6"],
    "commute_nonzero": ["commute", "--expr", "d1", "--expr", "x1*d1"],
    "analyze": ["analyze", "--ring", str(INPUTS / "ring_d2_d1d2.json"), "--mmax", "40", "--precision", "8", "--rank", "1"],
    "schur": ["schur", "--pair", str(INPUTS / "example_pair.json"), "--rank-search", "4", "--nmax", "12", "--mmax", "24"],
    "glue": ["glue", "--ideal", "x^2", "--subring", "h", "--budget", "10"],
    "cm": ["cm", "--algebra", "x^2,x^3,h", "--budget", "12"],
    "cm_m2": ["cm", "--algebra", "x^2,x*h,h^2,x^3,x^2*h,x*h^2,h^3"],
    "cycle": ["cycle", "--fn", "x^2*h", "--primes", "x,h"],
}
EXIT = {"commute_nonzero": 2}


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("name", sorted(CASES))
def test_golden(name, capsys):
    code, out, _ = run(CASES[name], capsys)
    assert code == EXIT.get(name, 0)
    path = GOLDEN / f"{name}.json"
    if os.environ.get("PDO_REGEN_GOLDEN"):
        path.write_text(out)
    assert out == path.read_text()


@pytest.mark.parametrize("name", ["glue", "cycle", "commute"])
def test_byte_identical_reruns(name, capsys):
    a = run(CASES[name], capsys)[1]
    b = run(CASES[name], capsys)[1]
    assert a == b


def test_report_embeds_config_and_version(capsys):
    _, out, _ = run(CASES["cycle"] + ["--seed", "7"], capsys)
    d = json.loads(out)
    assert d["version"] == __version__
    assert d["config"]["seed"] == 7
    assert set(d["config"]) >= {"precision", "mmax", "window_tmin", "window_tmax", "window_umax", "budget", "rank_search", "seed", "out"}


def test_commute_certifies_target(capsys):
    _, out, _ = run(CASES["commute"], capsys)
    pairs = json.loads(out)["result"]["pairs"]
    assert all(p["vanishes"] and p["certified_mod"] >= 6 for p in pairs)


def test_commute_nonzero_residual(capsys):
    code, out, _ = run(CASES["commute_nonzero"], capsys)
    d = json.loads(out)
    assert code == 2 and d["status"] == "negative"
    assert d["result"]["pairs"][0]["residual"] == "d1"


def test_commute_empty_file(tmp_path, capsys):
    f = tmp_path / "empty.txt"
    f.write_text("")
    code, _, err = run(["commute", str(f)], capsys)
    assert code == 1 and "ParseError" in err


def test_commute_json_input(tmp_path, capsys):
    from pdo.parser import parse_operator

    ops = [parse_operator(t, 2, 10).to_json() for t in ("d2^2 - 2*inv((1-x2)^2)*E", "d1*d2 + inv(1-x2)*E*d1")]
    f = tmp_path / "ops.json"
    f.write_text(json.dumps({"operators": ops}))
    code, out, _ = run(["commute", str(f), "--precision", "6"], capsys)
    assert code == 0 and json.loads(out)["result"]["pairs"][0]["vanishes"]
    code, _, err = run(["commute", str(f), "--precision", "30"], capsys)
    assert code == 1 and "PrecisionExhausted" in err


def test_analyze_values(capsys):
    _, out, _ = run(CASES["analyze"], capsys)
    r = json.loads(out)["result"]
    assert r["self_intersection"] == {"num": "1", "den": "2"}
    assert r["coherent"] is False


def test_analyze_noncommuting_is_negative(capsys):
    code, out, _ = run(["analyze", "--gen", "d1^2", "--gen", "d1*d2 + x1"], capsys)
    assert code == 2 and "NotCommutative" in json.loads(out)["message"]


def test_schur_values(capsys):
    _, out, _ = run(CASES["schur"], capsys)
    r = json.loads(out)["result"]
    assert r["r"] == 1 and r["stable"]
    assert all(f"u^{n}*t^-{n}" in r["witnesses"][str(n)] for n in range(2, 13))


def test_schur_unstable_is_negative(tmp_path, capsys):
    w = {"tmin": -20, "tmax": 20, "umax": 10}
    pair = {
        "A": {"kind": "algebra", "generators": [{"terms": [{"u": 0, "t": -1, "num": "1", "den": "1"}]}]},
        "W": {"kind": "module", "rule": {"type": "triangle", "params": {"slope": "0", "step": 1, "start": 1, "extra": [{"terms": [{"u": 1, "t": 0, "num": "1", "den": "1"}]}]}}},
    }
    for s in pair.values():
        s["window"] = w
    f = tmp_path / "pair.json"
    f.write_text(json.dumps(pair))
    code, out, _ = run(["schur", "--pair", str(f), "--nmax", "4", "--mmax", "8"], capsys)
    # W has no rank: dims grow by one per level
    assert code == 2 and "NoRankFits" in json.loads(out)["message"]


def test_text_format(capsys):
    _, out, _ = run(CASES["glue"] + ["--format", "text"], capsys)
    assert out.startswith("pdo glue (ok)")
    assert 'generators: ["h", "x^2", "x^3"]' in out


def test_out_file(tmp_path, capsys):
    f = tmp_path / "r.json"
    run(CASES["cycle"] + ["--out", str(f), "--format", "text"], capsys)
    assert json.loads(f.read_text())["result"]["cycle"] == "2*(x) + 1*(h)"


def test_bad_config_rejected(capsys):
    with pytest.raises(SystemExit):
        main(["cycle", "--fn", "x", "--primes", "x", "--budget", "0"])


def test_console_script_entry():
    r = subprocess.run([sys.executable, "-m", "pdo.cli", "cycle", "--fn", "x/h", "--primes", "x,h"], capture_output=True, text=True)
    # division is not part of the polynomial grammar; use --den instead
    assert r.returncode == 1
    r = subprocess.run([sys.executable, "-m", "pdo.cli", "cycle", "--fn", "x", "--den", "h", "--primes", "x,h"], capture_output=True, text=True)
    assert r.returncode == 0 and json.loads(r.stdout)["result"]["cycle"] == "1*(x) - 1*(h)"

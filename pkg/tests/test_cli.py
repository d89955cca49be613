from __future__ import annotations

import json
import subprocess
import sys

import pytest

from weyl_mirror.cli import main, render_report


def strip_timing(rep):
    rep = dict(rep)
    rep.pop("elapsed_ms", None)
    return rep


def test_sadm(capsys):
    assert main(["sadm", "--family", "E6"]) == 0
    assert capsys.readouterr().out.strip() == "D=12 |S_adm|=151"
    assert main(["sadm", "--family", "E", "--rank", "8"]) == 0
    assert capsys.readouterr().out.strip() == "D=60 |S_adm|=434"
    assert main(["sadm", "--family", "A1", "--k", "1"]) == 0
    assert capsys.readouterr().out.strip() == "D=1 |S_adm|=3"


def test_mirror_d4(tmp_path, capsys):
    out = tmp_path / "d4.json"
    assert main(["mirror", "--family", "D", "--rank", "4", "--seed", "7", "--points", "2", "--threads", "1", "--output", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["pass"] is True and rep["family"] == "D" and rep["rank"] == 4
    assert all(c["equal"] for c in rep["checks"])
    assert capsys.readouterr().out.strip().endswith("PASS")


def test_mirror_a_needs_k(capsys):
    assert main(["mirror", "--family", "A3"]) == 2


def test_mirror_a3(capsys):
    assert main(["mirror", "--family", "A3", "--k", "2", "--points", "2", "--threads", "1"]) == 0


def test_lemma_d(capsys):
    assert main(["lemma-d", "--family", "D5", "--points", "1", "--threads", "1"]) == 0


def test_wdvv_e6(capsys):
    assert main(["wdvv", "--family", "E6", "--points", "3"]) == 0


def test_duality_without_data(capsys):
    assert main(["duality", "--family", "E7"]) == 2
    assert "prepotential data required" in capsys.readouterr().err
    assert main(["duality", "--family", "D4"]) == 2


@pytest.mark.parametrize(
    "argv",
    [[], ["frobnicate"], ["sadm"], ["sadm", "--family", "B3"], ["mirror", "--family", "D4", "--points", "0"], ["mirror", "--family", "D4", "--threads", "0"]],
)
def test_usage_errors(argv, capsys):
    assert main(argv) == 2


def test_report_roundtrip(tmp_path, capsys):
    out = tmp_path / "r.json"
    main(["mirror", "--family", "D4", "--points", "1", "--threads", "1", "--output", str(out)])
    capsys.readouterr()
    assert main(["report", str(out)]) == 0
    text = capsys.readouterr().out
    assert text.startswith("mirror: D4") and "mismatches=0" in text
    assert main(["report", str(tmp_path / "missing.json")]) == 2


def test_report_lists_mismatches():
    rep = {
        "command": "duality",
        "family": "E",
        "rank": 6,
        "seed": 0,
        "D": "12",
        "s_adm_size": 151,
        "certificate": True,
        "points": [{}],
        "checks": [{"alpha": 1, "beta": 2, "eps": 3, "point_index": 0, "lhs": "1", "rhs": "2", "equal": False}],
        "pass": False,
    }
    text = render_report(rep)
    assert "mismatch alpha=1 beta=2 eps=3 point_index=0 lhs=1 rhs=2" in text
    assert text.endswith("FAIL")


def test_json_independent_of_threads(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    args = ["mirror", "--family", "D5", "--seed", "3", "--points", "4"]
    assert main(args + ["--threads", "1", "--output", str(a)]) == 0
    assert main(args + ["--threads", "2", "--output", str(b)]) == 0
    assert strip_timing(json.loads(a.read_text())) == strip_timing(json.loads(b.read_text()))


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "weyl_mirror", "sadm", "--family", "E7"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip() == "D=24 |S_adm|=254"

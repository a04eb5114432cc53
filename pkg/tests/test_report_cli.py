from __future__ import annotations

import json
import xml.etree.ElementTree as ET

import pytest

from nilcone import __version__
from nilcone.cli import main
from nilcone.cones import QuotientFan
from nilcone.errors import IoError, UnknownSuite
from nilcone.exact_core import ExactMatrix, QuadNum, QuadRay
from nilcone.figures import emit_fan_svg, fan_svg
from nilcone.report import (
    EXIT_FAIL,
    EXIT_FLAGGED,
    EXIT_OK,
    EXIT_USAGE,
    FLAGGED,
    Report,
    check,
    CheckRecord,
)
from nilcone.suites import run_verification


def test_version():
    assert __version__


def test_exit_codes_from_statuses():
    r = Report("c", "s")
    assert r.exit_code == EXIT_OK
    r.extend([CheckRecord("a", "", FLAGGED)])
    assert r.exit_code == EXIT_FLAGGED
    r.extend([check("b", "", False)])
    assert r.exit_code == EXIT_FAIL


def test_json_and_text_agree():
    rep = run_verification("p4p4", "symplectic")
    data = json.loads(rep.to_json())
    text = rep.render_text()
    assert data["summary"] == rep.counts()
    for rec in data["records"]:
        mark = {"pass": "PASS", "fail": "FAIL", "flagged": "FLAG"}[rec["status"]]
        assert f"[{mark}] {rec['check_id']}" in text
    c = rep.counts()
    assert f"{c['pass']} passed, {c['fail']} failed, {c['flagged']} flagged" in text


def test_reports_are_deterministic():
    a = run_verification("p3p3", "gluing").to_json()
    b = run_verification("p3p3", "gluing").to_json()
    assert a == b


def test_unknown_suite():
    with pytest.raises(UnknownSuite):
        run_verification("k3", "nope")


def test_empty_suite_gets_a_note():
    rep = run_verification("k3", "series")
    assert rep.records == []
    assert any("series" in n for n in rep.notes)


def test_cli_verify_json(tmp_path, capsys):
    out = tmp_path / "r.json"
    code = main(["verify", "--case", "k3", "--suite", "relations", "--json", str(out)])
    assert code == EXIT_OK
    data = json.loads(out.read_text())
    assert data["exit_code"] == 0 and data["case"] == "k3"
    assert "case k3, suite relations" in capsys.readouterr().out


def test_cli_flagged_exit(capsys):
    assert main(["verify", "--case", "p3p3", "--suite", "gluing"]) == EXIT_FLAGGED
    assert "[FLAG]" in capsys.readouterr().out


def test_cli_failure_exit(tmp_path, capsys):
    from nilcone.dataset import load_case

    data = json.loads(load_case("k3").to_json())
    data["matrices"]["Tx"]["rows"][0][1] = "-2"
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(data))
    assert main(["verify", "--data", str(bad), "--suite", "symplectic"]) == EXIT_FAIL


def test_cli_usage_errors(tmp_path, capsys):
    assert main(["verify", "--data", str(tmp_path / "missing.json")]) == EXIT_USAGE
    assert main(["lcsl", "--case", "p3p3", "--point", "nowhere"]) == EXIT_USAGE
    with pytest.raises(SystemExit) as info:
        main(["verify", "--case", "p6p6"])
    assert info.value.code == 2
    with pytest.raises(SystemExit):
        main(["series", "--degree", "-1"])
    assert main(["transport", "--case", "k3"]) == EXIT_USAGE


def test_cli_lcsl_json(capsys):
    assert main(["lcsl", "--case", "p3p3", "--point", "o", "--format", "json"]) == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    assert data["verdict"] is True


def test_cli_series(capsys):
    assert main(["series", "--degree", "6", "--format", "json"]) == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    assert all(v["annihilates_w0"] for v in data["operators"].values())


def test_cli_transport_square(capsys):
    assert main(["transport", "--loop", "square", "--prec", "64", "--format", "json"]) == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    assert data["identity_deviation"] < 1e-10


@pytest.mark.parametrize("case,side", [("p4p4", "a"), ("p4p4", "b"), ("p3p3", "b"), ("k3", "b")])
def test_cli_fan_writes_valid_svg(tmp_path, capsys, case, side):
    out = tmp_path / f"{case}-{side}.svg"
    assert main(["fan", "--case", case, "--side", side, "--depth", "2", "--out", str(out)]) == EXIT_OK
    root = ET.parse(out).getroot()
    assert root.tag.endswith("svg") and root.get("version") == "1.1"
    ns = "{http://www.w3.org/2000/svg}"
    assert len(root.findall(f"{ns}polygon")) >= 1
    dashed = [e for e in root.findall(f"{ns}line") if e.get("stroke-dasharray")]
    assert len(dashed) == 2


def test_fan_svg_io_error(tmp_path):
    fan = QuotientFan([(1, 0), (0, 1)], (), ExactMatrix.identity(2))
    with pytest.raises(IoError):
        emit_fan_svg(fan, tmp_path / "no" / "such" / "dir.svg")


def test_single_chamber_and_vertical_closure():
    ray = QuadRay(QuadNum(0, 0, 2), QuadNum(1, 0, 2))
    fan = QuotientFan([(1, 0), (0, 1)], (ray,), ExactMatrix.identity(2))
    text = fan_svg(fan)
    ET.fromstring(text.split("\n", 1)[1])
    assert "slope ∞" in text
    with pytest.raises(ValueError):
        fan_svg(QuotientFan([], (), ExactMatrix.identity(2)))

"""Corrupted inputs must make the matching suites fail, or the checks prove nothing."""
from __future__ import annotations

import pytest

from nilcone.report import FAIL
from nilcone.suites import SUITES, run_verification


def _failed(report) -> set:
    return {r.check_id for r in report.records if r.status == FAIL}


def _bump(raw, name, i, j, delta=1):
    row = raw["matrices"][name]["rows"][i]
    row[j] = str(int(row[j]) + delta)


@pytest.mark.parametrize("case,name,i,j", [("p3p3", "Ty", 0, 1), ("p4p4", "phi13", 0, 1), ("k3", "phi21", 1, 2)])
def test_symplectic_detects_corruption(corrupt, case, name, i, j):
    ds = corrupt(case, lambda raw: _bump(raw, name, i, j))
    assert f"form.{name}" in _failed(run_verification(ds, "symplectic"))


@pytest.mark.parametrize("case", ["p3p3", "p4p4"])
def test_unipotency_detects_corruption(corrupt, case):
    def edit(raw):
        raw["matrices"]["Tx"]["rows"][5][5] = "-1"

    ds = corrupt(case, edit)
    assert "unipotency.Tx" in _failed(run_verification(ds, "lcsl"))


def test_relations_detect_corruption(corrupt):
    ds = corrupt("p3p3", lambda raw: _bump(raw, "TE1sq", 1, 4))
    assert "relation.TE1-square" in _failed(run_verification(ds, "relations"))


def test_k3_relations_detect_corruption(corrupt):
    ds = corrupt("k3", lambda raw: _bump(raw, "Ty", 1, 3))
    assert "relation.k3.y'" in _failed(run_verification(ds, "relations"))


def test_couplings_detect_wrong_expectation(corrupt):
    def edit(raw):
        raw["couplings"][0]["expected"][0] = "3"

    ds = corrupt("p3p3", edit)
    assert "coupling.o" in _failed(run_verification(ds, "couplings"))


def test_mirror_detects_swapped_dictionary(corrupt):
    def edit(raw):
        raw["a_side"]["mirror_dictionary"] = {"H1": "N2", "H2": "N1"}

    ds = corrupt("p4p4", edit)
    assert "mirror.depth3" in _failed(run_verification(ds, "mirror"))


def test_flop_detects_wrong_invariant(corrupt):
    def edit(raw):
        raw["flop"]["n0"]["1"] = 81

    ds = corrupt("p3p3", edit)
    assert "series.flop-invariance" in _failed(run_verification(ds, "series"))


def test_delta_detects_wrong_printed_entry(corrupt):
    def edit(raw):
        rec = raw["deltas"][0]
        key = sorted(rec["expected"])[0]
        rec["expected"][key] = "7"

    ds = corrupt("p4p4", edit)
    assert any(c.startswith("delta.") for c in _failed(run_verification(ds, "gluing")))


def test_unevaluable_dataset_fails_instead_of_crashing(corrupt):
    def edit(raw):
        raw["matrices"]["Tx"]["rows"][5][5] = "-1"

    ds = corrupt("p3p3", edit)
    codes = [run_verification(ds, suite).exit_code for suite in SUITES[1:] if suite != "transport"]
    assert 1 in codes

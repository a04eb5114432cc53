"""Exact and numerical checks on monodromy nilpotent cones of two-parameter families."""
from __future__ import annotations

from .dataset import BUNDLED, MonodromyDataset, load_case, load_dataset
from .report import Report

__version__ = "0.1.0"

__all__ = ["BUNDLED", "MonodromyDataset", "Report", "load_case", "load_dataset", "run_verification"]


def run_verification(case, suite: str = "all", **kw) -> Report:
    from .suites import run_verification as _run

    return _run(case, suite, **kw)

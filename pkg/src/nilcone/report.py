"""Check records and reports with a JSON and a text rendering."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

PASS, FAIL, FLAGGED = "pass", "fail", "flagged"

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_FLAGGED = 0, 1, 2, 3


def plain(value):
    """Make witness values JSON-friendly; exact numbers become strings."""
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    if hasattr(value, "to_rows"):
        return [[str(v) for v in row] for row in value.to_rows()]
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    return str(value)


@dataclass
class CheckRecord:
    check_id: str
    anchor: str
    status: str
    witness: dict = field(default_factory=dict)
    note: str = ""

    def as_dict(self) -> dict:
        out = {"check_id": self.check_id, "anchor": self.anchor, "status": self.status,
               "witness": plain(self.witness)}
        if self.note:
            out["note"] = self.note
        return out


def check(check_id: str, anchor: str, ok: bool, witness: dict | None = None, note: str = "") -> CheckRecord:
    return CheckRecord(check_id, anchor, PASS if ok else FAIL, witness or {}, note)


@dataclass
class Report:
    case: str
    suite: str
    records: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def extend(self, recs) -> None:
        self.records.extend(recs)

    def counts(self) -> dict:
        out = {PASS: 0, FAIL: 0, FLAGGED: 0}
        for r in self.records:
            out[r.status] += 1
        return out

    @property
    def exit_code(self) -> int:
        c = self.counts()
        if c[FAIL]:
            return EXIT_FAIL
        if c[FLAGGED]:
            return EXIT_FLAGGED
        return EXIT_OK

    def failed(self) -> list:
        return [r for r in self.records if r.status == FAIL]

    def as_dict(self) -> dict:
        return {"case": self.case, "suite": self.suite, "summary": self.counts(),
                "exit_code": self.exit_code, "notes": list(self.notes),
                "records": [r.as_dict() for r in self.records]}

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, ensure_ascii=False)

    def render_text(self) -> str:
        lines = [f"case {self.case}, suite {self.suite}"]
        for r in self.records:
            mark = {PASS: "PASS", FAIL: "FAIL", FLAGGED: "FLAG"}[r.status]
            lines.append(f"  [{mark}] {r.check_id}  ({r.anchor})")
            if r.status != PASS or r.note:
                if r.note:
                    lines.append(f"         {r.note}")
                for k, v in plain(r.witness).items():
                    lines.append(f"         {k}: {json.dumps(v, ensure_ascii=False)}")
        for n in self.notes:
            lines.append(f"  note: {n}")
        c = self.counts()
        lines.append(f"  {c[PASS]} passed, {c[FAIL]} failed, {c[FLAGGED]} flagged")
        return "\n".join(lines)

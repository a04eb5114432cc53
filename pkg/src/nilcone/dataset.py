"""Case-study datasets: loading, validation, word evaluation, canonical dumps.

Matrix entries are strings ``"p/q"`` so that nothing passes through floats.
Words such as ``"TE1^-1 * Tx^-1 * Ty^4"`` name products of dataset
matrices; ``X^-T`` is the inverse transpose and ``id`` the identity.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema

from .errors import (
    DimensionError,
    IoError,
    ParseError,
    SchemaError,
    UnknownCase,
    UnknownGenerator,
)
from .exact_core import (
    BilinearForm,
    ExactMatrix,
    dual_action,
    rat,
    unipotent_log,
)

SCHEMA_TAG = "nilcone-dataset/1"
BUNDLED = ("p4p4", "p3p3", "k3")

_MATRIX = {
    "type": "array",
    "minItems": 1,
    "items": {"type": "array", "minItems": 1, "items": {"type": ["string", "integer"]}},
}

SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["schema", "name", "dimension", "weight", "form", "matrices"],
    "properties": {
        "schema": {"const": SCHEMA_TAG},
        "name": {"type": "string"},
        "title": {"type": "string"},
        "dimension": {"type": "integer", "minimum": 1},
        "weight": {"type": "integer", "minimum": 1},
        "form": {
            "type": "object",
            "required": ["kind", "matrix"],
            "properties": {
                "kind": {"enum": ["symplectic", "symmetric"]},
                "matrix": _MATRIX,
                "note": {"type": "string"},
            },
        },
        "matrices": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "required": ["rows", "frame"],
                "properties": {
                    "rows": _MATRIX,
                    "as_printed": _MATRIX,
                    "frame": {"enum": ["cohomology", "period"]},
                    "anchor": {"type": "string"},
                    "note": {"type": "string"},
                },
            },
        },
        "permutations": {
            "type": "object",
            "additionalProperties": {"type": "array", "items": {"type": "integer"}},
        },
        "definitions": {"type": "object", "additionalProperties": {"type": "string"}},
        "points": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "required": ["generators"],
                "properties": {
                    "generators": {"type": "array", "items": {"type": "string"}},
                    "lcsl": {"type": "boolean"},
                },
            },
        },
        "connections": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "required": ["source", "target"],
                "properties": {"source": {"type": "string"}, "target": {"type": "string"}},
            },
        },
        "exceptional": {"type": "array", "items": {"type": "string"}},
        "relations": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "lhs", "rhs"],
                "properties": {
                    "id": {"type": "string"},
                    "lhs": {"type": "string"},
                    "rhs": {"type": "string"},
                    "anchor": {"type": "string"},
                },
            },
        },
        "nilpotents": {"type": "object"},
        "couplings": {"type": "array"},
        "deltas": {"type": "array"},
        "gluing": {"type": "object"},
        "a_side": {"type": "object"},
        "flop": {"type": "object"},
        "prepotential": {"type": "object"},
        "picard_fuchs": {"type": "object"},
        "discriminant": {"type": "object"},
        "transport": {"type": "object"},
        "delta_family": {"type": "object"},
        "reference_nilpotent": {"type": "object"},
        "discrepancies": {"type": "array"},
        "notes": {"type": "array", "items": {"type": "string"}},
    },
}


@dataclass(frozen=True)
class RelationSpec:
    id: str
    lhs: str
    rhs: str
    anchor: str = ""


_FACTOR = re.compile(r"^\s*([A-Za-z][A-Za-z0-9_']*)\s*(?:\^\s*(-?\d+|-?T))?\s*$")


def parse_word(word: str) -> list[tuple[str, int | str]]:
    """Split a word into (name, exponent) pairs; exponent may be 'T' or '-T'."""
    text = word.strip()
    if text in ("", "id", "I"):
        return []
    out: list[tuple[str, int | str]] = []
    for chunk in text.split("*"):
        m = _FACTOR.match(chunk)
        if not m:
            raise ParseError(f"cannot parse factor {chunk!r} in word {word!r}")
        name, exp = m.group(1), m.group(2)
        if name in ("id", "I"):
            continue
        if exp is None:
            out.append((name, 1))
        elif exp.endswith("T"):
            out.append((name, exp))
        else:
            out.append((name, int(exp)))
    return out


def _parse_matrix(raw, where: str, dim: int | None = None) -> ExactMatrix:
    try:
        grid = [[rat(str(v)) for v in row] for row in raw]
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"{where}: bad rational entry ({exc})") from exc
    width = dim if dim is not None else len(grid[0])
    if dim is not None and len(grid) != dim:
        raise DimensionError(f"{where}: expected {dim} rows, found {len(grid)}")
    for i, row in enumerate(grid):
        if len(row) != width:
            raise DimensionError(f"{where}: row {i} has {len(row)} entries, expected {width}")
    return ExactMatrix(grid)


def matrix_to_json(m: ExactMatrix) -> list[list[str]]:
    return [[str(v) for v in row] for row in m.to_rows()]


@dataclass
class MonodromyDataset:
    raw: dict
    name: str
    dimension: int
    weight: int
    form: BilinearForm
    printed: dict[str, ExactMatrix]
    matrices: dict[str, ExactMatrix]
    relations: list[RelationSpec] = field(default_factory=list)

    # ---- accessors
    @property
    def points(self) -> dict:
        return self.raw.get("points", {})

    @property
    def connections(self) -> dict:
        return self.raw.get("connections", {})

    @property
    def exceptional(self) -> list[str]:
        return list(self.raw.get("exceptional", []))

    def section(self, key: str, default=None):
        return self.raw.get(key, default)

    def matrix(self, name: str) -> ExactMatrix:
        if name in self.matrices:
            return self.matrices[name]
        if name in ("id", "I"):
            return ExactMatrix.identity(self.dimension)
        raise UnknownGenerator(f"{self.name}: unknown matrix {name!r}")

    def evaluate(self, word: str) -> ExactMatrix:
        out = ExactMatrix.identity(self.dimension)
        for name, exp in parse_word(word):
            base = self.matrix(name)
            if exp == "T":
                factor = base.T
            elif exp == "-T":
                factor = dual_action(base)
            else:
                factor = base ** exp
            out = out @ factor
        return out

    @cached_property
    def nilpotents(self) -> dict[str, ExactMatrix]:
        """Logs and linear combinations declared under ``nilpotents``."""
        out: dict[str, ExactMatrix] = {}
        pending = dict(self.raw.get("nilpotents", {}))
        while pending:
            progressed = False
            for key, spec in list(pending.items()):
                if "log" in spec:
                    out[key] = unipotent_log(self.evaluate(spec["log"]))
                elif "combo" in spec:
                    if not all(k in out for k in spec["combo"]):
                        continue
                    acc = ExactMatrix.zeros(self.dimension)
                    for k, c in spec["combo"].items():
                        acc = acc + out[k].scale(rat(str(c)))
                    out[key] = acc
                elif "conjugate" in spec:
                    if spec["conjugate"] not in out:
                        continue
                    g = self.evaluate(spec["by"])
                    out[key] = g.inverse() @ out[spec["conjugate"]] @ g
                else:
                    raise SchemaError(f"nilpotent {key!r}: need log, combo or conjugate")
                del pending[key]
                progressed = True
            if not progressed:
                raise SchemaError(f"unresolvable nilpotent definitions: {sorted(pending)}")
        return out

    def nilpotent(self, name: str) -> ExactMatrix:
        try:
            return self.nilpotents[name]
        except KeyError:
            raise UnknownGenerator(f"{self.name}: unknown nilpotent {name!r}") from None

    def matrix_log(self, word: str) -> ExactMatrix:
        """Logarithm of a unipotent word, memoised per dataset."""
        cache = self.__dict__.setdefault("_log_cache", {})
        if word not in cache:
            cache[word] = unipotent_log(self.evaluate(word))
        return cache[word]

    def point_generators(self, point: str) -> list[ExactMatrix]:
        if point not in self.points:
            raise UnknownGenerator(f"{self.name}: unknown boundary point {point!r}")
        return [self.evaluate(w) for w in self.points[point]["generators"]]

    def discrepancy(self, key: str) -> dict | None:
        for rec in self.raw.get("discrepancies", []):
            if rec.get("id") == key:
                return rec
        return None

    # ---- serialization
    def to_json(self) -> str:
        return dumps_canonical(canonical_raw(self.raw))


def canonical_raw(raw: dict) -> dict:
    """Normalize every matrix entry to the reduced string form."""
    out = json.loads(json.dumps(raw))
    out["form"]["matrix"] = [[str(rat(str(v))) for v in row] for row in out["form"]["matrix"]]
    for rec in out.get("matrices", {}).values():
        for key in ("rows", "as_printed"):
            if key in rec:
                rec[key] = [[str(rat(str(v))) for v in row] for row in rec[key]]
    return out


def _is_flat(x) -> bool:
    return isinstance(x, list) and all(not isinstance(v, (list, dict)) for v in x)


def dumps_canonical(obj, indent: int = 0) -> str:
    """Sorted-key JSON with scalar arrays kept on one line."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f"{inner}{json.dumps(k, ensure_ascii=False)}: {dumps_canonical(obj[k], indent + 1)}"
            for k in sorted(obj)
        ]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, list):
        if _is_flat(obj):
            return "[" + ", ".join(json.dumps(v, ensure_ascii=False) for v in obj) + "]"
        items = [f"{inner}{dumps_canonical(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    return json.dumps(obj, ensure_ascii=False)


def build_dataset(raw: dict, where: str = "<dataset>") -> MonodromyDataset:
    try:
        jsonschema.validate(raw, SCHEMA)
    except jsonschema.ValidationError as exc:
        loc = "/".join(str(p) for p in exc.absolute_path)
        raise SchemaError(f"{where}: {loc or '<root>'}: {exc.message}") from None
    dim = raw["dimension"]
    form_m = _parse_matrix(raw["form"]["matrix"], f"{where}:form", dim)
    form = BilinearForm(form_m, -1 if raw["form"]["kind"] == "symplectic" else 1)

    printed: dict[str, ExactMatrix] = {}
    matrices: dict[str, ExactMatrix] = {}
    for name, rec in raw["matrices"].items():
        m = _parse_matrix(rec["rows"], f"{where}:matrices/{name}", dim)
        if "as_printed" in rec:
            _parse_matrix(rec["as_printed"], f"{where}:matrices/{name}/as_printed", dim)
        printed[name] = m
        matrices[name] = dual_action(m) if rec["frame"] == "period" else m
    for name, perm in raw.get("permutations", {}).items():
        if sorted(perm) != list(range(dim)):
            raise SchemaError(f"{where}: permutation {name!r} is not a permutation of 0..{dim - 1}")
        matrices[name] = ExactMatrix.permutation(perm)

    ds = MonodromyDataset(raw, raw["name"], dim, raw["weight"], form, printed, matrices)
    # definitions may refer to each other; resolve by dependency
    pending = dict(raw.get("definitions", {}))
    while pending:
        ready = [n for n, w in pending.items()
                 if all(g in ds.matrices or g in ("id", "I") for g, _ in parse_word(w))]
        if not ready:
            raise SchemaError(f"{where}: unresolvable definitions {sorted(pending)}")
        for name in ready:
            ds.matrices[name] = ds.evaluate(pending.pop(name))
    for rel in raw.get("relations", []):
        spec = RelationSpec(rel["id"], rel["lhs"], rel["rhs"], rel.get("anchor", ""))
        for side in (spec.lhs, spec.rhs):
            for nm, _ in parse_word(side):
                if nm not in ds.matrices:
                    raise SchemaError(f"{where}: relation {spec.id} uses unknown name {nm!r}")
        ds.relations.append(spec)
    for conn, rec in ds.connections.items():
        if conn not in ds.matrices:
            raise SchemaError(f"{where}: connection {conn!r} has no matrix")
        for end in (rec["source"], rec["target"]):
            if end not in ds.points:
                raise SchemaError(f"{where}: connection {conn!r} names unknown point {end!r}")
    return ds


def load_dataset(path: str | Path) -> MonodromyDataset:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read {p}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{p}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return build_dataset(raw, str(p))


def bundled_path(case: str) -> Path:
    if case not in BUNDLED:
        raise UnknownCase(f"unknown case {case!r}; choose from {', '.join(BUNDLED)}")
    return Path(str(resources.files("nilcone") / "data" / f"{case}.json"))


_CACHE: dict[str, MonodromyDataset] = {}


def load_case(case: str) -> MonodromyDataset:
    """Bundled dataset by name (cached; datasets are treated as read-only)."""
    if case not in _CACHE:
        _CACHE[case] = load_dataset(bundled_path(case))
    return _CACHE[case]


def fraction_str(x: Fraction) -> str:
    return str(x)

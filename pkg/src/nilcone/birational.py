"""A-side: divisor classes in rank two, pullbacks of Kähler cones, movable-cone chambers."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Sequence

from .cones import QuotientFan, order_rays, oriented_closure
from .dataset import MonodromyDataset
from .errors import DepthMismatch, InconsistentDataset, Singular
from .exact_core import ExactMatrix, QuadNum, QuadRay, primitive_integer_vector, squarefree_decomposition


@dataclass(frozen=True)
class DivisorClass:
    coords: tuple
    basis: str = "H"

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(Fraction(c) for c in self.coords))


@dataclass(frozen=True)
class PullbackMap:
    """Columns are images of the source basis, written in the target basis."""

    name: str
    matrix: ExactMatrix
    source_basis: str = ""
    target_basis: str = "H"

    def __post_init__(self):
        if self.matrix.shape != (2, 2):
            raise InconsistentDataset(f"{self.name}: pullback maps are 2x2")
        if self.matrix.det() == 0:
            raise Singular(f"{self.name} is singular")

    @property
    def is_lattice_automorphism(self) -> bool:
        return self.matrix.is_integral() and abs(self.matrix.det()) == 1

    def __call__(self, d: DivisorClass) -> DivisorClass:
        v = self.matrix @ ExactMatrix([[c] for c in d.coords])
        return DivisorClass((v[0, 0], v[1, 0]), self.target_basis)

    def compose(self, other: PullbackMap, name: str | None = None) -> PullbackMap:
        """``self ∘ other``."""
        return PullbackMap(name or f"{self.name}{other.name}", self.matrix @ other.matrix,
                           other.source_basis, self.target_basis)

    def inverse(self, name: str | None = None) -> PullbackMap:
        return PullbackMap(name or f"{self.name}^-1", self.matrix.inverse(), self.target_basis, self.source_basis)


@dataclass(frozen=True)
class RationalCone:
    generators: tuple  # primitive integer pairs
    basis: str = "H"


def pullback_cone(cone: RationalCone, m: PullbackMap) -> RationalCone:
    out = []
    for g in cone.generators:
        img = m(DivisorClass(g, cone.basis))
        out.append(primitive_integer_vector(img.coords))
    return RationalCone(tuple(out), m.target_basis)


def standard_cone(basis: str = "H") -> RationalCone:
    return RationalCone(((1, 0), (0, 1)), basis)


# ------------------------------------------------------------ dataset maps


def a_side_maps(ds: MonodromyDataset) -> dict:
    spec = ds.section("a_side", {})
    maps = {"id": PullbackMap("id", ExactMatrix.identity(2))}
    for name, rec in spec.get("maps", {}).items():
        maps[name] = PullbackMap(
            name,
            ExactMatrix(rec["matrix"]),
            ",".join(rec.get("source_basis", [])),
            ",".join(rec.get("target_basis", spec.get("basis", ["H1", "H2"]))),
        )
    for name, word in spec.get("derived_maps", {}).items():
        base, _, exp = word.partition("^")
        m = maps[base]
        maps[name] = m.inverse(name) if exp == "-1" else m
    return maps


def orbit_map(ds: MonodromyDataset) -> PullbackMap:
    spec = ds.section("a_side", {})
    maps = a_side_maps(ds)
    acc = maps["id"]
    for name in spec["orbit_word"]:
        acc = acc.compose(maps[name])
    return PullbackMap("orbit", acc.matrix)


def rho_star(ds: MonodromyDataset) -> PullbackMap:
    """Compose the pullbacks along the cycle of flops and check the result."""
    m = orbit_map(ds)
    expected = ds.section("a_side", {}).get("orbit_expected")
    if expected is not None and m.matrix != ExactMatrix(expected):
        raise InconsistentDataset(f"{ds.name}: orbit map {m.matrix} differs from {expected}")
    if abs(m.matrix.trace()) <= 2:
        raise InconsistentDataset(f"{ds.name}: orbit map has finite order or is parabolic")
    return PullbackMap("rho*", m.matrix)


def has_rational_fixed_ray(m: ExactMatrix) -> bool:
    tr, det = m.trace(), m.det()
    disc = tr * tr - 4 * det
    if disc < 0:
        return False
    if disc.denominator != 1:
        return False
    r = isqrt(int(disc))
    return r * r == int(disc)


def identity_checks(ds: MonodromyDataset) -> list:
    """Replay lattice identities such as ``M_Z3 = 4 M_Z1 - φ13*(H2)``."""
    maps = a_side_maps(ds)
    out = []
    for rec in ds.section("a_side", {}).get("identities", []):
        img = maps[rec["map"]](DivisorClass(rec["vector"]))
        out.append((rec["id"], tuple(img.coords) == tuple(Fraction(v) for v in rec["expected"])))
    return out


# ------------------------------------------------------------ chamber fans


@dataclass
class ChamberFan:
    rays: list
    closure: tuple
    orbit_matrix: ExactMatrix | None
    depth: int
    basis: tuple = ("H1", "H2")

    @property
    def chambers(self) -> list:
        return list(zip(self.rays, self.rays[1:]))

    def chamber_dets(self) -> list:
        return [a[0] * b[1] - a[1] * b[0] for a, b in self.chambers]

    def cross_signs_monotone(self) -> bool:
        return all(d > 0 for d in self.chamber_dets())


def fundamental_walls(ds: MonodromyDataset) -> list:
    maps = a_side_maps(ds)
    rays = []
    for rec in ds.section("a_side", {}).get("kahler_cones", []):
        rays.extend(pullback_cone(standard_cone(), maps[rec["map"]]).generators)
    return order_rays(rays)


def positive_cone_boundary(form: Sequence) -> tuple:
    """Isotropic directions of a binary quadratic form, oriented into x + y > 0."""
    a, b, c = Fraction(form[0][0]), Fraction(form[0][1]) + Fraction(form[1][0]), Fraction(form[1][1])
    # a x^2 + b x y + c y^2 = 0 with x = 1: y = (-b ± sqrt(b^2 - 4ac)) / (2c)
    disc = b * b - 4 * a * c
    if disc <= 0:
        raise InconsistentDataset("form has no real isotropic directions")
    num, den = disc.numerator * disc.denominator, disc.denominator
    k, d = squarefree_decomposition(num)
    if d == 1:
        raise InconsistentDataset("isotropic directions are rational")
    root = QuadNum(0, Fraction(k, den), d)
    rays = []
    for s in (1, -1):
        y = (QuadNum(-b, 0, d) + root * s) / QuadNum(2 * c, 0, d)
        r = QuadRay(QuadNum(1, 0, d), y)
        rays.append(r.oriented((r.x + r.y).sign()))
    rays.sort(key=lambda r: float((r.y - r.x) / (r.x + r.y)))
    return tuple(rays)


def movable_chambers(ds: MonodromyDataset, depth: int) -> ChamberFan:
    if depth < 0:
        raise ValueError("depth must be non-negative")
    spec = ds.section("a_side", {})
    if "orbit_word" not in spec:
        closure = positive_cone_boundary(spec["positive_cone_form"])
        return ChamberFan(order_rays([(1, 0), (0, 1)]), closure, None, depth)
    m = orbit_map(ds).matrix
    base = fundamental_walls(ds)
    rays = []
    for n in range(-depth, depth + 1):
        g = m ** n
        for r in base:
            img = g @ ExactMatrix([[r[0]], [r[1]]])
            rays.append(primitive_integer_vector((img[0, 0], img[1, 0])))
    return ChamberFan(order_rays(rays), oriented_closure(m), m, depth)


def closure_expected(ds: MonodromyDataset) -> list:
    """Printed closure rays as QuadRays: entries (x, y_rational, y_sqrt_coeff, d)."""
    out = []
    for x, a, b, d in ds.section("a_side", {}).get("closure_expected", []):
        d = int(d)
        out.append(QuadRay(QuadNum(Fraction(x), 0, d), QuadNum(Fraction(a), Fraction(b), d)))
    return out


def dictionary_matrix(dictionary: dict, a_basis=("H1", "H2"), b_basis=("N1", "N2")) -> ExactMatrix:
    cols = []
    for a in a_basis:
        target = dictionary[a]
        cols.append([1 if target == b else 0 for b in b_basis])
    return ExactMatrix.from_columns(cols)


@dataclass
class MirrorComparison:
    verdict: bool
    mapped: list
    b_rays: list
    closure_ok: bool
    depth: int


def mirror_compare(a_fan: ChamberFan, b_fan: QuotientFan, dictionary: dict,
                   b_depth: int | None = None) -> MirrorComparison:
    """Push A-side walls through the dictionary and compare ray sequences in order."""
    if b_depth is not None and b_depth != a_fan.depth:
        raise DepthMismatch(f"A-side depth {a_fan.depth} vs B-side depth {b_depth}")
    m = dictionary_matrix(dictionary)
    mapped = []
    for r in a_fan.rays:
        img = m @ ExactMatrix([[r[0]], [r[1]]])
        mapped.append(primitive_integer_vector((img[0, 0], img[1, 0])))
    ok_rays = mapped == list(b_fan.rays)
    ok_closure = len(a_fan.closure) == len(b_fan.closure) and all(
        _map_ray(m, a).is_parallel(b) and _same_side(_map_ray(m, a), b)
        for a, b in zip(a_fan.closure, b_fan.closure)
    )
    return MirrorComparison(ok_rays and ok_closure, mapped, list(b_fan.rays), ok_closure, a_fan.depth)


def _map_ray(m: ExactMatrix, r: QuadRay) -> QuadRay:
    p, q, s, t = (v for row in m.to_rows() for v in row)
    return QuadRay(r.x * p + r.y * q, r.x * s + r.y * t)


def _same_side(a: QuadRay, b: QuadRay) -> bool:
    return (a.x * b.x + a.y * b.y).sign() > 0

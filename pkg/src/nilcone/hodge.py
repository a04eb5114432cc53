"""Weight filtrations of nilpotent operators, the LCSL test and coupling tensors."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement, permutations
from typing import Sequence

from .errors import AsymmetricTensor, DimensionMismatch, NotNilpotent, NotProportional, WrongCenter
from .exact_core import (
    ExactMatrix,
    is_unipotent,
    nilpotency_index,
    primitive_integer_vector,
    subspace_contains,
    subspace_dim,
    subspace_equal,
    subspace_intersection,
    subspace_sum,
    unipotent_log,
)


@dataclass(frozen=True)
class Filtration:
    """Increasing filtration ``W_0 ⊆ W_1 ⊆ ... ⊆ W_{2c}``; ``None`` is the zero space."""

    dimension: int
    center: int
    steps: tuple  # steps[j] is a column basis of W_j, or None

    def step(self, j: int) -> ExactMatrix | None:
        if j < 0:
            return None
        if j >= len(self.steps):
            return ExactMatrix.identity(self.dimension)
        return self.steps[j]

    def dims(self, weights: Sequence[int] | None = None) -> tuple[int, ...]:
        if weights is None:
            weights = range(0, 2 * self.center + 1, 2)
        return tuple(subspace_dim(self.step(j)) for j in weights)

    def same_as(self, other: Filtration) -> bool:
        return len(self.steps) == len(other.steps) and all(
            subspace_equal(a, b) for a, b in zip(self.steps, other.steps)
        )


def _power_kernel(n: ExactMatrix, k: int) -> ExactMatrix | None:
    return (n ** k).nullspace()


def _power_image(n: ExactMatrix, k: int) -> ExactMatrix | None:
    if k == 0:
        return ExactMatrix.identity(n.rows)
    return (n ** k).column_space()


def weight_filtration(n: ExactMatrix, center: int) -> Filtration:
    """Deligne's filtration of ``n`` centred at ``center``.

    Closed form: ``W_j = sum over a - b = j - center of ker n^(a+1) ∩ im n^b``.
    """
    if not n.is_square:
        raise DimensionMismatch("weight_filtration needs a square matrix")
    idx = nilpotency_index(n)
    if idx is None:
        raise NotNilpotent("matrix is not nilpotent")
    if idx > center + 1:
        raise WrongCenter(f"N^{center + 1} != 0 (nilpotency index {idx})")
    dim = n.rows
    kers = [_power_kernel(n, a + 1) for a in range(2 * center + 1)]
    ims = [_power_image(n, b) for b in range(2 * center + 1)]
    steps = []
    for j in range(2 * center + 1):
        k = j - center
        acc = None
        for b in range(max(0, -k), 2 * center + 1):
            a = b + k
            if a >= len(kers):
                break
            acc = subspace_sum(acc, subspace_intersection(kers[a], ims[b]))
        steps.append(acc)
    return Filtration(dim, center, tuple(steps))


def cone_filtration(gens: Sequence[ExactMatrix], center: int, weights: Sequence = None) -> Filtration:
    """Filtration of ``sum λ_i N_i``; all-ones weights by default."""
    weights = weights or [1] * len(gens)
    acc = ExactMatrix.zeros(gens[0].rows)
    for lam, g in zip(weights, gens):
        acc = acc + g.scale(lam)
    return weight_filtration(acc, center)


def lowers_weight(n: ExactMatrix, w: Filtration) -> bool:
    """``n W_j ⊆ W_{j-2}`` for every step."""
    for j in range(len(w.steps)):
        src = w.step(j)
        if src is None:
            continue
        if not subspace_contains(w.step(j - 2), (n @ src).column_space()):
            return False
    return True


def check_filtration_preserved(g: ExactMatrix, w: Filtration) -> bool:
    if g.shape != (w.dimension, w.dimension):
        raise DimensionMismatch(f"{g.shape} vs filtration on Q^{w.dimension}")
    for basis in w.steps:
        if basis is None:
            continue
        if not subspace_equal((g @ basis).column_space(), basis):
            return False
    return True


def project_mod_I2(x: ExactMatrix, w2_basis: ExactMatrix) -> ExactMatrix:
    """Restriction to W_2; two operators agree modulo I_2 iff these agree."""
    if x.cols != w2_basis.rows:
        raise DimensionMismatch(f"{x.shape} cannot act on basis with {w2_basis.rows} rows")
    return x @ w2_basis


# ------------------------------------------------------------------ LCSL


@dataclass
class LCSLReport:
    point: str
    unipotent_flags: dict
    filtration_dims: tuple
    expected_dims: tuple
    m_matrix: ExactMatrix | None
    m_det: Fraction | None
    verdict: bool
    w0: tuple = ()
    notes: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "point": self.point,
            "unipotent": self.unipotent_flags,
            "filtration_dims": list(self.filtration_dims),
            "expected_dims": list(self.expected_dims),
            "m_matrix": None if self.m_matrix is None else [[str(v) for v in r] for r in self.m_matrix.to_rows()],
            "m_det": None if self.m_det is None else str(self.m_det),
            "w0": [str(v) for v in self.w0],
            "verdict": self.verdict,
            "notes": list(self.notes),
        }


def _extend_basis(start: list, pool: list) -> list:
    out = list(start)
    rank = ExactMatrix.from_columns(out).rank() if out else 0
    for v in pool:
        trial = ExactMatrix.from_columns(out + [v])
        r = trial.rank()
        if r > rank:
            out.append(v)
            rank = r
    return out


def _coefficient_on(v: Sequence, w0: Sequence) -> Fraction | None:
    """Scalar c with v = c w0, or None when v is not on that line."""
    c = None
    for a, b in zip(v, w0):
        if b == 0:
            if a != 0:
                return None
            continue
        q = Fraction(a) / Fraction(b)
        if c is None:
            c = q
        elif q != c:
            return None
    return c if c is not None else Fraction(0)


def lcsl_verify_matrices(name: str, mats: Sequence[ExactMatrix], weight: int) -> LCSLReport:
    r = len(mats)
    flags = {f"T{i + 1}": is_unipotent(m) for i, m in enumerate(mats)}
    expected = (1, 1 + r)
    if not all(flags.values()):
        return LCSLReport(name, flags, (), expected, None, None, False, notes=["condition 1 fails: not unipotent"])
    logs = [unipotent_log(m) for m in mats]
    try:
        w = cone_filtration(logs, weight)
    except (WrongCenter, NotNilpotent) as exc:
        return LCSLReport(name, flags, (), expected, None, None, False, notes=[f"condition 2 fails: {exc}"])
    dims = w.dims([0, 2])
    if dims != expected:
        return LCSLReport(name, flags, dims, expected, None, None, False, notes=["condition 2 fails: dimensions"])
    w0 = primitive_integer_vector(w.step(0).column(0))
    if next(v for v in w0 if v) < 0:
        w0 = tuple(-v for v in w0)
    basis = _extend_basis([w0], w.step(2).columns())
    m_rows = []
    for nj in logs:
        row = []
        for wk in basis[1:]:
            img = (nj @ ExactMatrix.from_columns([wk])).column(0)
            c = _coefficient_on(img, w0)
            if c is None:
                return LCSLReport(name, flags, dims, expected, None, None, False, w0,
                                  ["condition 3 fails: N_j W_2 not inside W_0"])
            row.append(c)
        m_rows.append(row)
    m = ExactMatrix(m_rows)
    det = m.det()
    notes = [] if det != 0 else ["condition 3 fails: m is singular"]
    return LCSLReport(name, flags, dims, expected, m, det, det != 0, w0, notes)


def lcsl_verify(ds, point: str) -> LCSLReport:
    """Run the three LCSL conditions on a boundary point of a dataset."""
    gens = ds.points[point]["generators"]
    return lcsl_verify_matrices(point, [ds.matrix(g) for g in gens], ds.weight)


# ------------------------------------------------------------- couplings


@dataclass(frozen=True)
class CouplingTensor:
    rank: int
    order: int
    entries: dict  # sorted index tuple (0-based) -> Fraction
    n0: ExactMatrix

    def __getitem__(self, idx: tuple) -> Fraction:
        return self.entries[tuple(sorted(idx))]

    def as_tuple(self) -> tuple:
        """Entries in lexicographic multi-index order, e.g. (C111, C112, C122, C222)."""
        return tuple(self.entries[k] for k in combinations_with_replacement(range(self.rank), self.order))

    def is_symmetric(self) -> bool:
        return True  # entries are stored per multiset; asymmetry is rejected at build time


def reference_nilpotent(ds) -> ExactMatrix:
    spec = ds.section("reference_nilpotent", {"row": 0, "col": ds.dimension - 1, "value": "1"})
    return ExactMatrix.unit(ds.dimension, spec["row"], spec["col"], Fraction(spec["value"]))


def _ratio(prod: ExactMatrix, n0: ExactMatrix) -> Fraction | None:
    (pos, val), = n0.nonzero_entries().items()
    c = prod[pos] / val
    return c if prod == n0.scale(c) else None


def extract_couplings(gens: Sequence[ExactMatrix], n0: ExactMatrix, order: int = 3) -> CouplingTensor:
    """Solve ``N_i N_j N_k = C_ijk n0`` exactly (products of ``order`` factors)."""
    if n0.rank() != 1:
        raise NotProportional("reference nilpotent must have rank one")
    for g in gens:
        if not (g @ n0).is_zero() or not (n0 @ g).is_zero():
            raise NotProportional("a generator does not annihilate the reference nilpotent")
    r = len(gens)
    entries: dict = {}
    for idx in combinations_with_replacement(range(r), order):
        vals = set()
        for perm in set(permutations(idx)):
            prod = ExactMatrix.identity(n0.rows)
            for i in perm:
                prod = prod @ gens[i]
            c = _ratio(prod, n0)
            if c is None:
                raise NotProportional(f"product over {tuple(i + 1 for i in perm)} is not a multiple of n0")
            vals.add(c)
        if len(vals) != 1:
            raise AsymmetricTensor(f"index {tuple(i + 1 for i in idx)}: values {sorted(vals)}")
        entries[idx] = vals.pop()
    return CouplingTensor(r, order, entries, n0)

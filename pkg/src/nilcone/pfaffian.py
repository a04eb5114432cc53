"""Reduce a holonomic system of θ-operators to a first-order Pfaffian system over Q(x, y)."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import sympy
from sympy import QQ
from sympy.polys.matrices import DomainMatrix

from .errors import WrongHolonomicRank
from .series import X, Y, ThetaOperator

FIELD = QQ.frac_field(X, Y)
FX, FY = FIELD.from_sympy(X), FIELD.from_sympy(Y)

PREFERRED_BASIS = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (3, 0)]


def _theta_x(f):
    return FX * f.diff(FX)


def _theta_y(f):
    return FY * f.diff(FY)


def _prolong(op: dict, which: str) -> dict:
    """Left-multiply ``Σ c_α θ^α`` by θ_x or θ_y."""
    out: dict = {}
    d = _theta_x if which == "x" else _theta_y
    step = (1, 0) if which == "x" else (0, 1)
    for (a, b), c in op.items():
        dc = d(c)
        if dc:
            out[(a, b)] = out.get((a, b), FIELD.zero) + dc
        key = (a + step[0], b + step[1])
        out[key] = out.get(key, FIELD.zero) + c
    return {k: v for k, v in out.items() if v}


def _monomials(order: int) -> list:
    """Column order: higher total degree first, then higher θ_y power first."""
    cols = []
    for deg in range(order, -1, -1):
        for b in range(deg, -1, -1):
            cols.append((deg - b, b))
    return cols


def _normal_form(op: ThetaOperator) -> dict:
    return {k: FIELD.from_sympy(v) for k, v in op.left_normal().items()}


def _standard_monomials(ops: Sequence[dict], order: int):
    """Rows: every θ^β·op with total order ≤ ``order``. Returns (non-pivots, rref, pivots, cols)."""
    rows = []
    for op in ops:
        o = max(a + b for a, b in op)
        frontier = [op]
        seen = {(0, 0): op}
        for level in range(order - o + 1):
            rows.extend(frontier)
            if level == order - o:
                break
            nxt = []
            for beta, cur in list(seen.items()):
                if beta[0] + beta[1] != level:
                    continue
                for which, step in (("x", (1, 0)), ("y", (0, 1))):
                    key = (beta[0] + step[0], beta[1] + step[1])
                    if key not in seen:
                        seen[key] = _prolong(cur, which)
                        nxt.append(seen[key])
            frontier = nxt
    cols = _monomials(order)
    index = {c: i for i, c in enumerate(cols)}
    mat = DomainMatrix([[r.get(c, FIELD.zero) for c in cols] for r in rows], (len(rows), len(cols)), FIELD)
    rref, pivots = mat.rref()
    nonpiv = [cols[i] for i in range(len(cols)) if i not in set(pivots)]
    return nonpiv, rref, pivots, cols, index


@dataclass(frozen=True)
class PfaffianSystem:
    """``θ_x F = A_x F``, ``θ_y F = A_y F`` with ``F = (θ^b f)`` over the listed basis."""

    basis: tuple
    a_x: tuple  # rows of FracElements
    a_y: tuple
    singular: sympy.Expr = field(default=None)

    @property
    def rank(self) -> int:
        return len(self.basis)

    def sympy_matrix(self, which: str) -> sympy.Matrix:
        m = self.a_x if which == "x" else self.a_y
        return sympy.Matrix([[FIELD.to_sympy(v) for v in row] for row in m])

    def flatness_residual(self) -> list:
        """Entries of ``θ_y(A_x) − θ_x(A_y) − [A_y, A_x]``; all zero for a flat system."""
        n = self.rank
        ax, ay = self.a_x, self.a_y
        out = []
        for i in range(n):
            row = []
            for j in range(n):
                v = _theta_y(ax[i][j]) - _theta_x(ay[i][j])
                for k in range(n):
                    v -= ay[i][k] * ax[k][j] - ax[i][k] * ay[k][j]
                row.append(v)
            out.append(row)
        return out

    def is_flat(self) -> bool:
        return all(not v for row in self.flatness_residual() for v in row)

    def common_denominator(self):
        """``(den, N_x, N_y)`` as polynomials with ``A = N / den``."""
        den = FIELD.one.numer
        for m in (self.a_x, self.a_y):
            for row in m:
                for v in row:
                    den = den.lcm(v.denom)
        def scaled(m):
            return tuple(tuple((v.numer * den.exquo(v.denom)) for v in row) for row in m)
        return den, scaled(self.a_x), scaled(self.a_y)


def build_pfaffian(ops: Sequence[ThetaOperator], expected_rank: int | None = 6,
                   max_order: int = 8) -> PfaffianSystem:
    """Elimination over Q(x, y): prolong until no new standard monomials appear."""
    normal = [_normal_form(op) for op in ops]
    normal = [op for op in normal if op]
    if not normal:
        raise WrongHolonomicRank("empty operator set")
    start = max(max(a + b for a, b in op) for op in normal) + 1
    prev = None
    for order in range(start, max_order + 1):
        nonpiv, rref, pivots, cols, index = _standard_monomials(normal, order)
        top = [m for m in nonpiv if m[0] + m[1] == order]
        if not top and prev is not None and sorted(prev) == sorted(nonpiv):
            break
        prev = nonpiv
    else:
        raise WrongHolonomicRank(f"standard monomials did not stabilise by order {max_order}")
    basis = sorted(nonpiv, key=lambda m: (PREFERRED_BASIS.index(m) if m in PREFERRED_BASIS else 99,
                                          m[0] + m[1], -m[0]))
    if expected_rank is not None and len(basis) != expected_rank:
        raise WrongHolonomicRank(f"quotient has dimension {len(basis)}, expected {expected_rank}")
    if not basis:
        raise WrongHolonomicRank("quotient is zero: the operators are inconsistent")
    pivot_row = {cols[p]: r for r, p in enumerate(pivots)}
    rows = rref.rep.to_ddm()

    def reduce(mono) -> list:
        if mono in basis:
            return [FIELD.one if b == mono else FIELD.zero for b in basis]
        r = pivot_row.get(mono)
        if r is None:
            raise WrongHolonomicRank(f"monomial {mono} is outside the eliminated range")
        return [-rows[r][index[b]] for b in basis]

    a_x = tuple(tuple(reduce((a + 1, b))) for a, b in basis)
    a_y = tuple(tuple(reduce((a, b + 1))) for a, b in basis)
    return PfaffianSystem(tuple(basis), a_x, a_y)

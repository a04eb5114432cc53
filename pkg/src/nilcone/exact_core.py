"""Exact rational and real-quadratic arithmetic, plus the matrix layer.

Matrices wrap sympy's ``DomainMatrix`` over ``QQ`` (gmpy/flint backed) and
expose entries as :class:`fractions.Fraction`.  Nothing here touches floats.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Iterable, Sequence

from sympy import QQ, factorint
from sympy.polys.matrices import DomainMatrix

from .errors import (
    DimensionMismatch,
    MixedRadicand,
    NotNilpotent,
    NotQuasiUnipotent,
    NotTwoByTwo,
    NotUnipotent,
    RationalSpectrum,
    Singular,
)

Rat = Fraction


def rat(value) -> Fraction:
    """Coerce ints, strings like ``"-44/3"`` and ground-domain elements."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    num = getattr(value, "numerator", None)
    den = getattr(value, "denominator", None)
    if num is not None and den is not None:
        # gmpy2.mpq / flint.fmpq expose these as attributes or methods
        num = num() if callable(num) else num
        den = den() if callable(den) else den
        return Fraction(int(num), int(den))
    raise TypeError(f"cannot interpret {value!r} as a rational")


def _qq(value):
    f = rat(value)
    return QQ(f.numerator, f.denominator)


# ---------------------------------------------------------------- matrices


class ExactMatrix:
    """Immutable dense matrix over Q."""

    __slots__ = ("_dm", "_hash")

    def __init__(self, rows: Iterable[Iterable]):
        grid = [[_qq(v) for v in row] for row in rows]
        if not grid or not grid[0]:
            raise DimensionMismatch("matrices must be non-empty")
        width = len(grid[0])
        if any(len(r) != width for r in grid):
            raise DimensionMismatch("ragged rows")
        self._dm = DomainMatrix(grid, (len(grid), width), QQ).to_dense()
        self._hash = None

    @classmethod
    def _wrap(cls, dm: DomainMatrix) -> ExactMatrix:
        obj = cls.__new__(cls)
        dm = dm.convert_to(QQ) if dm.domain != QQ else dm
        obj._dm = dm.to_dense()
        obj._hash = None
        return obj

    # construction helpers
    @classmethod
    def identity(cls, n: int) -> ExactMatrix:
        return cls._wrap(DomainMatrix.eye(n, QQ))

    @classmethod
    def zeros(cls, rows: int, cols: int | None = None) -> ExactMatrix:
        return cls._wrap(DomainMatrix.zeros((rows, rows if cols is None else cols), QQ))

    @classmethod
    def unit(cls, n: int, i: int, j: int, value=1) -> ExactMatrix:
        """``value`` in slot (i, j) of an n-by-n zero matrix."""
        rows = [[0] * n for _ in range(n)]
        rows[i][j] = value
        return cls(rows)

    @classmethod
    def permutation(cls, perm: Sequence[int]) -> ExactMatrix:
        n = len(perm)
        return cls([[1 if perm[i] == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def from_columns(cls, cols: Sequence[Sequence]) -> ExactMatrix:
        return cls([list(r) for r in zip(*cols)])

    @classmethod
    def hstack(cls, *mats: ExactMatrix) -> ExactMatrix:
        return cls._wrap(mats[0]._dm.hstack(*[m._dm for m in mats[1:]]))

    # shape and access
    @property
    def shape(self) -> tuple[int, int]:
        return self._dm.shape

    @property
    def rows(self) -> int:
        return self._dm.shape[0]

    @property
    def cols(self) -> int:
        return self._dm.shape[1]

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def __getitem__(self, key) -> Fraction:
        i, j = key
        return rat(self._dm[i, j].element)

    def to_rows(self) -> tuple[tuple[Fraction, ...], ...]:
        return tuple(tuple(rat(v) for v in row) for row in self._dm.to_list())

    def column(self, j: int) -> tuple[Fraction, ...]:
        return tuple(row[j] for row in self.to_rows())

    def columns(self) -> list[tuple[Fraction, ...]]:
        return [tuple(c) for c in zip(*self.to_rows())]

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> ExactMatrix:
        grid = self.to_rows()
        return ExactMatrix([[grid[i][j] for j in cols] for i in rows])

    def nonzero_entries(self) -> dict[tuple[int, int], Fraction]:
        return {
            (i, j): v
            for i, row in enumerate(self.to_rows())
            for j, v in enumerate(row)
            if v != 0
        }

    # arithmetic
    def _check_same(self, other: ExactMatrix) -> None:
        if self.shape != other.shape:
            raise DimensionMismatch(f"shapes {self.shape} and {other.shape}")

    def __add__(self, other: ExactMatrix) -> ExactMatrix:
        self._check_same(other)
        return ExactMatrix._wrap(self._dm + other._dm)

    def __sub__(self, other: ExactMatrix) -> ExactMatrix:
        self._check_same(other)
        return ExactMatrix._wrap(self._dm - other._dm)

    def __neg__(self) -> ExactMatrix:
        return ExactMatrix._wrap(-self._dm)

    def scale(self, c) -> ExactMatrix:
        return ExactMatrix._wrap(self._dm * _qq(c))

    def __matmul__(self, other: ExactMatrix) -> ExactMatrix:
        if self.cols != other.rows:
            raise DimensionMismatch(f"cannot multiply {self.shape} by {other.shape}")
        return ExactMatrix._wrap(self._dm.matmul(other._dm))

    def __mul__(self, other):
        if isinstance(other, ExactMatrix):
            return self @ other
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, k: int) -> ExactMatrix:
        if not self.is_square:
            raise DimensionMismatch("power of a non-square matrix")
        if k < 0:
            return self.inverse() ** (-k)
        return ExactMatrix._wrap(self._dm ** k)

    @property
    def T(self) -> ExactMatrix:
        return ExactMatrix._wrap(self._dm.transpose())

    def det(self) -> Fraction:
        if not self.is_square:
            raise DimensionMismatch("determinant of a non-square matrix")
        return rat(self._dm.det())

    def trace(self) -> Fraction:
        return sum((self[i, i] for i in range(min(self.shape))), Fraction(0))

    def inverse(self) -> ExactMatrix:
        if not self.is_square:
            raise DimensionMismatch("inverse of a non-square matrix")
        if self.det() == 0:
            raise Singular("matrix is singular")
        return ExactMatrix._wrap(self._dm.inv())

    def rank(self) -> int:
        return self._dm.rank()

    def is_zero(self) -> bool:
        return self._dm.is_zero_matrix

    def is_integral(self) -> bool:
        return all(v.denominator == 1 for row in self.to_rows() for v in row)

    def charpoly(self) -> list[Fraction]:
        """Coefficients of det(t I - M), leading first."""
        return [rat(c) for c in self._dm.charpoly()]

    def nullspace(self) -> ExactMatrix | None:
        """Column basis of the kernel, or None when the kernel is zero."""
        ns = self._dm.nullspace()
        if ns.shape[0] == 0:
            return None
        return ExactMatrix._wrap(ns.transpose())

    def column_space(self) -> ExactMatrix | None:
        if self.is_zero():
            return None
        return ExactMatrix._wrap(self._dm.columnspace())

    # comparison
    def __eq__(self, other) -> bool:
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        return self.shape == other.shape and self._dm == other._dm

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.shape, self.to_rows()))
        return self._hash

    def __repr__(self) -> str:
        body = ", ".join("[" + ", ".join(str(v) for v in row) + "]" for row in self.to_rows())
        return f"ExactMatrix([{body}])"


# ------------------------------------------------------- linear subspaces
# Subspaces of Q^n are carried as ExactMatrix column bases; None is {0}.


def span(*vectors: Sequence) -> ExactMatrix | None:
    vecs = [v for v in vectors if any(rat(x) != 0 for x in v)]
    if not vecs:
        return None
    return ExactMatrix.from_columns(vecs).column_space()


def subspace_dim(basis: ExactMatrix | None) -> int:
    return 0 if basis is None else basis.cols


def subspace_sum(u: ExactMatrix | None, v: ExactMatrix | None) -> ExactMatrix | None:
    if u is None:
        return v
    if v is None:
        return u
    return ExactMatrix.hstack(u, v).column_space()


def subspace_intersection(u: ExactMatrix | None, v: ExactMatrix | None) -> ExactMatrix | None:
    if u is None or v is None:
        return None
    # solve u a = v b; the intersection is spanned by u a
    kernel = ExactMatrix.hstack(u, -v).nullspace()
    if kernel is None:
        return None
    coeffs = kernel.submatrix(range(u.cols), range(kernel.cols))
    return (u @ coeffs).column_space()


def subspace_contains(big: ExactMatrix | None, small: ExactMatrix | None) -> bool:
    if small is None:
        return True
    if big is None:
        return False
    return ExactMatrix.hstack(big, small).rank() == big.rank()


def subspace_equal(u: ExactMatrix | None, v: ExactMatrix | None) -> bool:
    return subspace_contains(u, v) and subspace_contains(v, u)


def kernel(m: ExactMatrix) -> ExactMatrix | None:
    return m.nullspace()


def image(m: ExactMatrix) -> ExactMatrix | None:
    return m.column_space()


def primitive_integer_vector(v: Sequence) -> tuple[int, ...]:
    """Scale a rational vector to coprime integers, keeping its direction."""
    from math import gcd, lcm

    fr = [rat(x) for x in v]
    den = lcm(*[x.denominator for x in fr]) if fr else 1
    ints = [int(x * den) for x in fr]
    g = 0
    for x in ints:
        g = gcd(g, x)
    if g == 0:
        return tuple(ints)
    return tuple(x // g for x in ints)


# ------------------------------------------------------------ bilinear forms


@dataclass(frozen=True)
class BilinearForm:
    """Nondegenerate pairing with Gram matrix ``gram``; ``parity`` is -1 (alternating) or +1."""

    gram: ExactMatrix
    parity: int = -1

    def __post_init__(self):
        if not self.gram.is_square:
            raise DimensionMismatch("form matrix must be square")
        if self.gram.T != self.gram.scale(self.parity):
            kind = "antisymmetric" if self.parity < 0 else "symmetric"
            raise ValueError(f"form matrix is not {kind}")
        if self.gram.det() == 0:
            raise Singular("degenerate form")

    @property
    def dimension(self) -> int:
        return self.gram.rows


class SymplecticForm(BilinearForm):
    def __init__(self, gram: ExactMatrix):
        super().__init__(gram, -1)


def standard_symplectic_form(n: int = 6) -> SymplecticForm:
    """Antidiagonal pairing for the basis order (A0..A_k, B_k..B0)."""
    if n % 2:
        raise DimensionMismatch("symplectic dimension must be even")
    half = n // 2
    rows = [[0] * n for _ in range(n)]
    for i in range(n):
        rows[i][n - 1 - i] = 1 if i < half else -1
    return SymplecticForm(ExactMatrix(rows))


def preserves_form(m: ExactMatrix, form: BilinearForm) -> bool:
    if not m.is_square or m.rows != form.dimension:
        raise DimensionMismatch(f"matrix {m.shape} against form of size {form.dimension}")
    return m.T @ form.gram @ m == form.gram


# ------------------------------------------------------ log / exp / duals


def nilpotency_index(n: ExactMatrix) -> int | None:
    """Smallest k with N^k = 0, or None if N is not nilpotent."""
    if not n.is_square:
        raise DimensionMismatch("nilpotency needs a square matrix")
    power = ExactMatrix.identity(n.rows)
    for k in range(1, n.rows + 1):
        power = power @ n
        if power.is_zero():
            return k
    return None


def is_unipotent(m: ExactMatrix) -> bool:
    return nilpotency_index(m - ExactMatrix.identity(m.rows)) is not None


def unipotent_log(m: ExactMatrix) -> ExactMatrix:
    """Finite log series; exact for unipotent input."""
    x = m - ExactMatrix.identity(m.rows)
    index = nilpotency_index(x)
    if index is None:
        raise NotUnipotent("no power of (M - I) up to the dimension vanishes")
    out = ExactMatrix.zeros(m.rows)
    power = ExactMatrix.identity(m.rows)
    for k in range(1, index):
        power = power @ x
        out = out + power.scale(Fraction((-1) ** (k - 1), k))
    return out


def nilpotent_exp(n: ExactMatrix) -> ExactMatrix:
    index = nilpotency_index(n)
    if index is None:
        raise NotNilpotent("matrix is not nilpotent")
    out = ExactMatrix.identity(n.rows)
    power = ExactMatrix.identity(n.rows)
    fact = 1
    for k in range(1, index):
        power = power @ n
        fact *= k
        out = out + power.scale(Fraction(1, fact))
    return out


def quasi_unipotency_order(m: ExactMatrix, k_max: int = 12) -> int:
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    power = ExactMatrix.identity(m.rows)
    for k in range(1, k_max + 1):
        power = power @ m
        if is_unipotent(power):
            return k
    raise NotQuasiUnipotent(f"no power up to {k_max} is unipotent")


def dual_action(m: ExactMatrix) -> ExactMatrix:
    """Inverse transpose: the induced action on the dual space."""
    return m.inverse().T


# ------------------------------------------------------------ Q(sqrt d)


def squarefree_decomposition(n: int) -> tuple[int, int]:
    """Return (k, d) with n = k^2 d and d squarefree (n > 0)."""
    if n <= 0:
        raise ValueError("expected a positive integer")
    k, d = 1, 1
    for p, e in factorint(n).items():
        k *= p ** (e // 2)
        if e % 2:
            d *= p
    return k, d


@dataclass(frozen=True)
class QuadNum:
    """The number a + b*sqrt(d) with d squarefree and positive."""

    a: Fraction
    b: Fraction = Fraction(0)
    d: int = 1

    def __post_init__(self):
        object.__setattr__(self, "a", rat(self.a))
        object.__setattr__(self, "b", rat(self.b))
        if self.d < 1 or squarefree_decomposition(self.d)[0] != 1:
            raise ValueError(f"radicand {self.d} is not squarefree and positive")

    def _coerce(self, other) -> QuadNum:
        if isinstance(other, QuadNum):
            if other.d != self.d and other.b != 0 and self.b != 0:
                raise MixedRadicand(f"sqrt({self.d}) mixed with sqrt({other.d})")
            return other
        return QuadNum(rat(other), 0, self.d)

    def _radicand(self, other: QuadNum) -> int:
        if self.b == 0:
            return other.d
        return self.d

    def __add__(self, other) -> QuadNum:
        o = self._coerce(other)
        return QuadNum(self.a + o.a, self.b + o.b, self._radicand(o))

    __radd__ = __add__

    def __neg__(self) -> QuadNum:
        return QuadNum(-self.a, -self.b, self.d)

    def __sub__(self, other) -> QuadNum:
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> QuadNum:
        return (-self) + other

    def __mul__(self, other) -> QuadNum:
        o = self._coerce(other)
        d = self._radicand(o)
        return QuadNum(self.a * o.a + self.b * o.b * d, self.a * o.b + self.b * o.a, d)

    __rmul__ = __mul__

    def conjugate(self) -> QuadNum:
        return QuadNum(self.a, -self.b, self.d)

    def norm(self) -> Fraction:
        return self.a * self.a - self.b * self.b * self.d

    def __truediv__(self, other) -> QuadNum:
        o = self._coerce(other)
        n = o.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt d)")
        num = self * o.conjugate()
        return QuadNum(num.a / n, num.b / n, num.d)

    def __rtruediv__(self, other) -> QuadNum:
        return self._coerce(other) / self

    def __eq__(self, other) -> bool:
        if not isinstance(other, QuadNum):
            try:
                other = QuadNum(rat(other), 0, self.d)
            except TypeError:
                return NotImplemented
        if self.b == 0 and other.b == 0:
            return self.a == other.a
        return (self.a, self.b, self.d) == (other.a, other.b, other.d)

    def __hash__(self) -> int:
        return hash((self.a, self.b, self.d if self.b else 1))

    @property
    def is_rational(self) -> bool:
        return self.b == 0

    def sign(self) -> int:
        """Exact sign of a + b sqrt(d)."""
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sb == 0:
            return sa
        if sa == 0 or sa == sb:
            return sb
        # opposite signs: compare a^2 with b^2 d
        diff = self.a * self.a - self.b * self.b * self.d
        return sa if diff > 0 else (-sa if diff < 0 else 0)

    def __lt__(self, other) -> bool:
        return (self - other).sign() < 0

    def __float__(self) -> float:
        return float(self.a) + float(self.b) * self.d ** 0.5

    def __str__(self) -> str:
        if self.b == 0:
            return str(self.a)
        from math import lcm

        den = lcm(self.a.denominator, self.b.denominator)
        a, b = int(self.a * den), int(self.b * den)
        root = f"√{self.d}"
        if abs(b) != 1:
            root = f"{abs(b)}{root}"
        if a == 0:
            body = ("-" if b < 0 else "") + root
        else:
            body = f"{a}{'-' if b < 0 else '+'}{root}"
        return body if den == 1 else f"({body})/{den}"

    def __repr__(self) -> str:
        return f"QuadNum({self.a}, {self.b}, {self.d})"


@dataclass(frozen=True)
class QuadRay:
    """A direction in the plane with coordinates in Q(sqrt d)."""

    x: QuadNum
    y: QuadNum
    eigenvalue: QuadNum | None = None

    @property
    def d(self) -> int:
        return self.y.d if self.y.b else self.x.d

    def as_floats(self) -> tuple[float, float]:
        return float(self.x), float(self.y)

    def oriented(self, sign: int) -> QuadRay:
        return self if sign > 0 else QuadRay(-self.x, -self.y, self.eigenvalue)

    def slope(self) -> QuadNum:
        return self.y / self.x

    def is_parallel(self, other: QuadRay) -> bool:
        return self.x * other.y - self.y * other.x == 0

    def __str__(self) -> str:
        return f"({self.x}, {self.y})"


def eigenrays_2x2(m: ExactMatrix) -> tuple[QuadRay, QuadRay]:
    """Eigen-directions of an integer 2x2 matrix with irrational spectrum.

    Each ray is scaled so its first coordinate is -1 (or its second is 1
    when the first vanishes).  The larger eigenvalue comes first.
    """
    if m.shape != (2, 2):
        raise NotTwoByTwo(f"expected 2x2, got {m.shape}")
    if not m.is_integral():
        raise ValueError("eigenrays_2x2 expects integer entries")
    p, q, r, s = (int(v) for row in m.to_rows() for v in row)
    tr, det = p + s, p * s - q * r
    disc = tr * tr - 4 * det
    if disc >= 0 and isqrt(disc) ** 2 == disc:
        raise RationalSpectrum(f"discriminant {disc} is a perfect square")
    if disc < 0:
        raise RationalSpectrum(f"discriminant {disc} is negative; no real rays")
    k, d = squarefree_decomposition(disc)
    rays = []
    for sgn in (1, -1):
        lam = QuadNum(Fraction(tr, 2), Fraction(sgn * k, 2), d)
        if q != 0:
            vx, vy = QuadNum(q, 0, d), lam - p
        else:
            vx, vy = lam - s, QuadNum(r, 0, d)
        if vx != 0:
            vx, vy = QuadNum(-1, 0, d), vy / (-vx)
        else:
            vx, vy = QuadNum(0, 0, d), QuadNum(1, 0, d)
        # exact eigen-equation check
        if (p * vx + q * vy - lam * vx) != 0 or (r * vx + s * vy - lam * vy) != 0:
            raise ArithmeticError("eigenvector check failed")
        rays.append(QuadRay(vx, vy, lam))
    return rays[0], rays[1]


def apply_2x2(m: ExactMatrix, ray: QuadRay) -> QuadRay:
    p, q, r, s = (v for row in m.to_rows() for v in row)
    return QuadRay(ray.x * p + ray.y * q, ray.x * r + ray.y * s, ray.eigenvalue)

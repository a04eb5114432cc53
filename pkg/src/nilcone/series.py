"""Truncated power series, θ-operators, Frobenius solutions and the flop identities."""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement, product
from math import comb, factorial
from typing import Mapping, Sequence

import sympy
from sympy import Poly, QQ, Symbol

from .errors import IdentityFails, NotAQuadraticShiftInA, TruncationTooSmall
from .exact_core import ExactMatrix, rat
from .hodge import CouplingTensor

TX, TY = sympy.symbols("tx ty")
X, Y = sympy.symbols("x y")
Q_VAR = Symbol("q")


# ------------------------------------------------------------ power series


@dataclass(frozen=True)
class PSeries:
    """Sum of ``c x^n y^m lx^a ly^b`` with ``n + m <= degree``; ``lx = log x``."""

    degree: int
    coeffs: Mapping  # (n, m, a, b) -> Fraction, zeros dropped

    @classmethod
    def build(cls, degree: int, terms) -> PSeries:
        acc: dict = defaultdict(Fraction)
        for key, c in (terms.items() if isinstance(terms, Mapping) else terms):
            n, m = key[0], key[1]
            if n + m <= degree and c:
                acc[key if len(key) == 4 else (n, m, 0, 0)] += Fraction(c)
        return cls(degree, {k: v for k, v in acc.items() if v})

    @classmethod
    def one(cls, degree: int) -> PSeries:
        return cls.build(degree, {(0, 0, 0, 0): 1})

    def coefficient(self, n: int, m: int, a: int = 0, b: int = 0) -> Fraction:
        return self.coeffs.get((n, m, a, b), Fraction(0))

    @property
    def log_degree(self) -> int:
        return max((a + b for _, _, a, b in self.coeffs), default=0)

    def __add__(self, other: PSeries) -> PSeries:
        d = min(self.degree, other.degree)
        acc = defaultdict(Fraction)
        for src in (self.coeffs, other.coeffs):
            for k, v in src.items():
                acc[k] += v
        return PSeries.build(d, acc)

    def __neg__(self) -> PSeries:
        return PSeries(self.degree, {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other: PSeries) -> PSeries:
        return self + (-other)

    def scale(self, c) -> PSeries:
        c = rat(c)
        return PSeries.build(self.degree, {k: v * c for k, v in self.coeffs.items()})

    def __mul__(self, other: PSeries) -> PSeries:
        d = min(self.degree, other.degree)
        acc = defaultdict(Fraction)
        for (n1, m1, a1, b1), c1 in self.coeffs.items():
            for (n2, m2, a2, b2), c2 in other.coeffs.items():
                if n1 + n2 + m1 + m2 <= d:
                    acc[(n1 + n2, m1 + m2, a1 + a2, b1 + b2)] += c1 * c2
        return PSeries.build(d, acc)

    def shift(self, i: int, j: int) -> PSeries:
        return PSeries.build(self.degree, {(n + i, m + j, a, b): c for (n, m, a, b), c in self.coeffs.items()})

    def theta_x(self) -> PSeries:
        acc = defaultdict(Fraction)
        for (n, m, a, b), c in self.coeffs.items():
            if n:
                acc[(n, m, a, b)] += n * c
            if a:
                acc[(n, m, a - 1, b)] += a * c
        return PSeries.build(self.degree, acc)

    def theta_y(self) -> PSeries:
        acc = defaultdict(Fraction)
        for (n, m, a, b), c in self.coeffs.items():
            if m:
                acc[(n, m, a, b)] += m * c
            if b:
                acc[(n, m, a, b - 1)] += b * c
        return PSeries.build(self.degree, acc)

    def is_zero_through(self, k: int) -> bool:
        if k > self.degree:
            raise TruncationTooSmall(f"series known through degree {self.degree}, asked {k}")
        return all(n + m > k for (n, m, _, _) in self.coeffs)

    def evaluate(self, x, y, log_x=None, log_y=None):
        """Numeric value; ``x``/``y`` may be mpmath numbers."""
        import mpmath

        lx = mpmath.log(x) if log_x is None else log_x
        ly = mpmath.log(y) if log_y is None else log_y
        total = mpmath.mpf(0)
        for (n, m, a, b), c in self.coeffs.items():
            total += mpmath.mpf(c.numerator) / c.denominator * x ** n * y ** m * lx ** a * ly ** b
        return total


def w0_series(degree: int) -> PSeries:
    """Holomorphic solution: ``(2n+2m)! ((n+m)!)^2 / (n!^4 m!^4)``."""
    if degree < 0:
        raise ValueError("degree must be non-negative")
    terms = {}
    for n in range(degree + 1):
        for m in range(degree + 1 - n):
            terms[(n, m, 0, 0)] = Fraction(
                factorial(2 * n + 2 * m) * factorial(n + m) ** 2, factorial(n) ** 4 * factorial(m) ** 4
            )
    return PSeries.build(degree, terms)


# ------------------------------------------------------------ theta operators


def _binom_shift(power: int, k: int) -> dict:
    """(θ + k)^power as {exponent: coefficient}."""
    return {r: Fraction(comb(power, r) * k ** (power - r)) for r in range(power + 1)}


@dataclass(frozen=True)
class ThetaOperator:
    """``Σ c θ_x^a θ_y^b x^i y^j``: θ-polynomials to the left of monomials."""

    terms: Mapping  # (i, j, a, b) -> Fraction

    @classmethod
    def build(cls, terms) -> ThetaOperator:
        acc = defaultdict(Fraction)
        for k, v in (terms.items() if isinstance(terms, Mapping) else terms):
            acc[k] += Fraction(v)
        return cls({k: v for k, v in acc.items() if v})

    @classmethod
    def from_right_terms(cls, parts: Mapping) -> ThetaOperator:
        """``{(i, j): P(tx, ty)}`` meaning ``Σ P(θ_x, θ_y) x^i y^j``."""
        acc = {}
        for (i, j), expr in parts.items():
            if isinstance(expr, str):
                expr = sympy.sympify(expr, locals={"tx": TX, "ty": TY})
            poly = Poly(sympy.expand(expr), TX, TY, domain=QQ)
            for (a, b), c in poly.terms():
                acc[(i, j, a, b)] = acc.get((i, j, a, b), Fraction(0)) + rat(c)
        return cls.build(acc)

    @classmethod
    def theta(cls, which: str) -> ThetaOperator:
        return cls({(0, 0, 1, 0) if which == "x" else (0, 0, 0, 1): Fraction(1)})

    @classmethod
    def monomial(cls, i: int, j: int, c=1) -> ThetaOperator:
        return cls.build({(i, j, 0, 0): c})

    def __add__(self, other: ThetaOperator) -> ThetaOperator:
        acc = dict(self.terms)
        for k, v in other.terms.items():
            acc[k] = acc.get(k, Fraction(0)) + v
        return ThetaOperator.build(acc)

    def __neg__(self) -> ThetaOperator:
        return ThetaOperator({k: -v for k, v in self.terms.items()})

    def __sub__(self, other: ThetaOperator) -> ThetaOperator:
        return self + (-other)

    def scale(self, c) -> ThetaOperator:
        return ThetaOperator.build({k: v * rat(c) for k, v in self.terms.items()})

    def __matmul__(self, other: ThetaOperator) -> ThetaOperator:
        # x^k θ^β = (θ - k)^β x^k
        acc = defaultdict(Fraction)
        for (i1, j1, a1, b1), c1 in self.terms.items():
            for (i2, j2, a2, b2), c2 in other.terms.items():
                for rx, cx in _binom_shift(a2, -i1).items():
                    for ry, cy in _binom_shift(b2, -j1).items():
                        acc[(i1 + i2, j1 + j2, a1 + rx, b1 + ry)] += c1 * c2 * cx * cy
        return ThetaOperator.build(acc)

    @property
    def order(self) -> int:
        return max((a + b for _, _, a, b in self.terms), default=0)

    @property
    def min_shift(self) -> int:
        return min((i + j for i, j, _, _ in self.terms), default=0)

    def left_normal(self) -> dict:
        """``{(a, b): c(x, y)}`` with polynomial coefficients written to the left."""
        acc: dict = defaultdict(lambda: sympy.Integer(0))
        for (i, j, a, b), c in self.terms.items():
            for rx, cx in _binom_shift(a, i).items():
                for ry, cy in _binom_shift(b, j).items():
                    acc[(rx, ry)] += sympy.Rational(c * cx * cy) * X ** i * Y ** j
        return {k: sympy.expand(v) for k, v in acc.items() if sympy.expand(v) != 0}

    def apply(self, s: PSeries) -> PSeries:
        return apply_theta(self, s)


def apply_theta(op: ThetaOperator, s: PSeries) -> PSeries:
    valid = s.degree + min(0, op.min_shift)
    if valid < 0:
        raise TruncationTooSmall(f"operator shifts by {op.min_shift}, series degree {s.degree}")
    cache: dict = {}
    total = PSeries(valid, {})
    for (i, j, a, b), c in op.terms.items():
        base = cache.get((i, j))
        if base is None:
            base = cache[(i, j)] = s.shift(i, j)
        t = base
        for _ in range(a):
            t = t.theta_x()
        for _ in range(b):
            t = t.theta_y()
        total = total + t.scale(c)
    return PSeries.build(valid, total.coeffs)


def picard_fuchs(ds) -> dict:
    spec = ds.section("picard_fuchs")
    if spec is None:
        return {}
    out = {}
    for name, parts in spec["operators"].items():
        out[name] = ThetaOperator.from_right_terms(
            {tuple(int(v) for v in key.split(",")): expr for key, expr in parts.items()}
        )
    return out


# ------------------------------------------------------------ Frobenius jets


class _Jet:
    """Polynomials in (e1, e2) truncated at total order ``k``."""

    __slots__ = ("c", "k")

    def __init__(self, c: dict, k: int):
        self.c = {key: v for key, v in c.items() if v and key[0] + key[1] <= k}
        self.k = k

    @classmethod
    def linear(cls, const, a, b, k):
        return cls({(0, 0): Fraction(const), (1, 0): Fraction(a), (0, 1): Fraction(b)}, k)

    def __mul__(self, other: _Jet) -> _Jet:
        acc = defaultdict(Fraction)
        for (p1, q1), v1 in self.c.items():
            for (p2, q2), v2 in other.c.items():
                if p1 + p2 + q1 + q2 <= self.k:
                    acc[(p1 + p2, q1 + q2)] += v1 * v2
        return _Jet(acc, self.k)

    def inverse(self) -> _Jet:
        c0 = self.c.get((0, 0), Fraction(0))
        if c0 == 0:
            raise ZeroDivisionError("jet not invertible")
        # 1/(c0 (1 + u)) = (1/c0) Σ (-u)^r
        u = _Jet({k: v / c0 for k, v in self.c.items() if k != (0, 0)}, self.k)
        acc = _Jet({(0, 0): Fraction(1)}, self.k)
        term = _Jet({(0, 0): Fraction(1)}, self.k)
        for _ in range(self.k):
            term = term * u
            term = _Jet({k: -v for k, v in term.c.items()}, self.k)
            acc = _Jet({k: acc.c.get(k, 0) + term.c.get(k, 0) for k in set(acc.c) | set(term.c)}, self.k)
        return _Jet({k: v / c0 for k, v in acc.c.items()}, self.k)


def _frobenius_jets(degree: int, order: int) -> dict:
    """Jets in ρ of c(n, m; ρ) / c(0, 0; ρ) for the ℙ³×ℙ³ hypergeometric coefficients."""
    out = {}
    for n in range(degree + 1):
        for m in range(degree + 1 - n):
            num = _Jet({(0, 0): Fraction(1)}, order)
            for k in range(1, 2 * (n + m) + 1):
                num = num * _Jet.linear(k, 2, 2, order)
            for k in range(1, n + m + 1):
                f = _Jet.linear(k, 1, 1, order)
                num = num * f * f
            den = _Jet({(0, 0): Fraction(1)}, order)
            for k in range(1, n + 1):
                f = _Jet.linear(k, 1, 0, order)
                den = den * f * f * f * f
            for k in range(1, m + 1):
                f = _Jet.linear(k, 0, 1, order)
                den = den * f * f * f * f
            out[(n, m)] = num * den.inverse()
    return out


def rho_derivative(jets: dict, degree: int, p: int, q: int) -> PSeries:
    """``∂_ρ1^p ∂_ρ2^q`` at ρ = 0 of ``Σ c(n,m;ρ) x^(n+ρ1) y^(m+ρ2)``."""
    terms = defaultdict(Fraction)
    scale = factorial(p) * factorial(q)
    for (n, m), jet in jets.items():
        for (p1, q1), v in jet.c.items():
            if p1 <= p and q1 <= q:
                a, b = p - p1, q - q1
                terms[(n, m, a, b)] += v * Fraction(scale, factorial(a) * factorial(b))
    return PSeries.build(degree, terms)


def frobenius_basis(degree: int, couplings: Sequence = (2, 6, 6, 2)) -> list:
    """Six solutions at the maximally unipotent point: w0, two single logs,
    two double logs weighted by the coupling tensor and the triple log."""
    jets = _frobenius_jets(degree, 3)
    c111, c112, c122, c222 = (Fraction(c) for c in couplings)
    cubic = {(0, 0, 0): c111, (0, 0, 1): c112, (0, 1, 1): c122, (1, 1, 1): c222}

    def cc(i, j, k):
        return cubic[tuple(sorted((i, j, k)))]

    d = {(p, q): rho_derivative(jets, degree, p, q) for p in range(4) for q in range(4) if p + q <= 3}

    def second(j, k):
        idx = [0, 0]
        idx[j] += 1
        idx[k] += 1
        return d[tuple(idx)]

    sols = [d[(0, 0)], d[(1, 0)], d[(0, 1)]]
    for i in range(2):
        acc = PSeries(degree, {})
        for j in range(2):
            for k in range(2):
                acc = acc + second(j, k).scale(cc(i, j, k) / 2)
        sols.append(acc)
    acc = PSeries(degree, {})
    for i, j, k in product(range(2), repeat=3):
        idx = [0, 0]
        for t in (i, j, k):
            idx[t] += 1
        acc = acc + d[tuple(idx)].scale(cc(i, j, k) / 6)
    sols.append(acc)
    return sols


# ------------------------------------------------------------ rational functions in q


@dataclass(frozen=True)
class RationalFn:
    """Reduced quotient of polynomials in one variable with monic denominator."""

    num: Poly
    den: Poly

    @classmethod
    def make(cls, num, den=1) -> RationalFn:
        n = Poly(num, Q_VAR, domain=QQ)
        d = Poly(den, Q_VAR, domain=QQ)
        if d.is_zero:
            raise ZeroDivisionError("zero denominator")
        g = n.gcd(d)
        n, d = n.exquo(g), d.exquo(g)
        lc = d.LC()
        return cls(n.quo_ground(lc), d.quo_ground(lc))

    @classmethod
    def const(cls, c) -> RationalFn:
        c = rat(c)
        return cls.make(sympy.Rational(c.numerator, c.denominator))

    def __add__(self, o: RationalFn) -> RationalFn:
        return RationalFn.make(self.num * o.den + o.num * self.den, self.den * o.den)

    def __neg__(self) -> RationalFn:
        return RationalFn(-self.num, self.den)

    def __sub__(self, o: RationalFn) -> RationalFn:
        return self + (-o)

    def __mul__(self, o) -> RationalFn:
        if not isinstance(o, RationalFn):
            o = RationalFn.const(o)
        return RationalFn.make(self.num * o.num, self.den * o.den)

    def is_zero(self) -> bool:
        return self.num.is_zero

    def invert_variable(self) -> RationalFn:
        """Substitute ``q -> 1/q``."""
        deg = max(self.num.degree(), self.den.degree(), 0)
        n = sympy.expand(self.num.as_expr().subs(Q_VAR, 1 / Q_VAR) * Q_VAR ** deg)
        d = sympy.expand(self.den.as_expr().subs(Q_VAR, 1 / Q_VAR) * Q_VAR ** deg)
        return RationalFn.make(n, d)

    def __str__(self) -> str:
        return str(sympy.factor(self.num.as_expr() / self.den.as_expr()))


def instanton_sum(n0: Mapping) -> RationalFn:
    """``Σ_d n0(d) d^3 q^d / (1 - q^d)``."""
    acc = RationalFn.const(0)
    for d, n in sorted((int(k), v) for k, v in n0.items()):
        acc = acc + RationalFn.make(Fraction(n) * d ** 3 * Q_VAR ** d, 1 - Q_VAR ** d)
    return acc


def flop_invariance_check(c_prime, c_flop, n0: Mapping, jac) -> bool:
    """Exact identity in Q(q'):  C' + Σ(q') = C^f + jac^3 Σ(q) at q = 1/q'."""
    jac = rat(jac)
    inst = instanton_sum(n0)
    lhs = RationalFn.const(c_prime) + inst
    rhs = RationalFn.const(c_flop) + inst.invert_variable() * (jac ** 3)
    residual = lhs - rhs
    if not residual.is_zero():
        err = IdentityFails(f"residual {residual}")
        err.residual = residual
        raise err
    return True


# ------------------------------------------------------------ coupling transforms


def coupling_pullback(c: CouplingTensor, jac: ExactMatrix) -> CouplingTensor:
    """``C'_{ijk} = Σ C_{lmn} J_li J_mj J_nk`` with ``J = dt/dt'``."""
    r, order = c.rank, c.order
    entries = {}
    for idx in combinations_with_replacement(range(r), order):
        total = Fraction(0)
        for src in product(range(r), repeat=order):
            w = c[src]
            if not w:
                continue
            for s, t in zip(src, idx):
                w *= jac[s, t]
            total += w
        entries[idx] = total
    return CouplingTensor(r, order, entries, c.n0)


def coupling_from_tuple(values: Sequence, rank: int = 2, order: int = 3, n0=None) -> CouplingTensor:
    keys = list(combinations_with_replacement(range(rank), order))
    return CouplingTensor(rank, order, dict(zip(keys, (rat(v) for v in values))), n0)


# ------------------------------------------------------------ prepotential


@dataclass(frozen=True)
class PeriodSymbolForm:
    """Quadratic form in period symbols ``a0..ar`` (A-periods) and ``b0..br``."""

    r: int
    coeffs: Mapping  # sorted (sym, sym) -> Fraction

    def has_b(self) -> bool:
        return any(s.startswith("b") for pair in self.coeffs for s in pair)

    def is_zero(self) -> bool:
        return not self.coeffs

    def a_matrix(self) -> ExactMatrix:
        """Symmetric S with form = ½ aᵀ S a (only meaningful when ``not has_b()``)."""
        n = self.r + 1
        s = [[Fraction(0)] * n for _ in range(n)]
        for (u, v), c in self.coeffs.items():
            i, j = int(u[1:]), int(v[1:])
            if i == j:
                s[i][i] += 2 * c
            else:
                s[i][j] += c
                s[j][i] += c
        return ExactMatrix(s)

    def __str__(self) -> str:
        parts = []
        for (u, v), c in sorted(self.coeffs.items()):
            mono = f"{u}^2" if u == v else f"{u}*{v}"
            parts.append(f"{c}*{mono}")
        return " + ".join(parts) or "0"


def _period_symbols(r: int) -> list:
    # basis order (A_0..A_r, B_r..B_0)
    return [f"a{i}" for i in range(r + 1)] + [f"b{i}" for i in range(r, -1, -1)]


def _quadratic(pairs) -> dict:
    acc = defaultdict(Fraction)
    for (u, v), c in pairs:
        acc[tuple(sorted((u, v)))] += c
    return {k: v for k, v in acc.items() if v}


def prepotential_form(periods: Sequence[dict], r: int) -> dict:
    """½ Σ a_i b_i for period vectors given as linear forms {symbol: coeff}."""
    pairs = []
    n = r + 1
    for i in range(n):
        a, b = periods[i], periods[2 * n - 1 - i]
        for u, cu in a.items():
            for v, cv in b.items():
                pairs.append(((u, v), cu * cv / 2))
    return _quadratic(pairs)


def prepotential_shift(connection: ExactMatrix, r: int) -> PeriodSymbolForm:
    """``F' - F`` where the primed periods are ``connection · (a, b)``."""
    n = 2 * (r + 1)
    if connection.shape != (n, n):
        raise ValueError(f"connection must be {n}x{n}")
    syms = _period_symbols(r)
    old = [{s: Fraction(1)} for s in syms]
    new = []
    for i in range(n):
        new.append({syms[j]: connection[i, j] for j in range(n) if connection[i, j]})
    diff = defaultdict(Fraction)
    for k, v in prepotential_form(new, r).items():
        diff[k] += v
    for k, v in prepotential_form(old, r).items():
        diff[k] -= v
    form = PeriodSymbolForm(r, {k: v for k, v in diff.items() if v})
    if form.has_b():
        raise NotAQuadraticShiftInA(f"b-symbols survive: {form}")
    return form


def form_from_matrix(q: Sequence, r: int, offset: int = 1) -> PeriodSymbolForm:
    """½ Σ Q_ij a_i a_j with Q indexed from ``a_offset``."""
    pairs = []
    for i, row in enumerate(q):
        for j, v in enumerate(row):
            pairs.append(((f"a{i + offset}", f"a{j + offset}"), rat(v) / 2))
    return PeriodSymbolForm(r, _quadratic(pairs))


# ------------------------------------------------------------ tangency


def root_multiplicity(expr, var, point, **subs) -> int:
    """Multiplicity of ``var = point`` as a root of ``expr`` after substituting ``subs``."""
    if isinstance(expr, str):
        expr = sympy.sympify(expr, locals={"x": X, "y": Y})
    e = expr.subs({sympy.Symbol(k): sympy.sympify(v) for k, v in subs.items()})
    v = sympy.Symbol(var) if isinstance(var, str) else var
    poly = Poly(sympy.expand(e), v, domain=QQ)
    lin = Poly(v - sympy.Rational(str(point)), v, domain=QQ)
    k = 0
    while not poly.is_zero:
        qq, rr = poly.div(lin)
        if not rr.is_zero:
            break
        poly, k = qq, k + 1
    return k


def tangency_multiplicity(ds) -> tuple:
    spec = ds.section("discriminant")
    t = spec["tangency"]
    var = "x" if t["line"] == "y" else "y"
    k = root_multiplicity(spec["polynomial"], var, t["point"], **{t["line"]: 0})
    return k, t["multiplicity"]

"""Adaptive Taylor transport of a Pfaffian system along piecewise-linear paths in ℂ²."""
from __future__ import annotations

import contextlib
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import flint
from flint import acb, acb_mat, acb_poly, arb

from .errors import PrecisionExhausted, SingularityTooClose
from .exact_core import ExactMatrix
from .pfaffian import PfaffianSystem, build_pfaffian

DEFAULT_PREC = 256
DEFAULT_TOL = 1e-10


@contextlib.contextmanager
def precision(bits: int):
    """Scoped working precision; flint keeps it in a global context."""
    old = flint.ctx.prec
    flint.ctx.prec = bits
    try:
        yield
    finally:
        flint.ctx.prec = old


def to_acb(v) -> acb:
    if isinstance(v, acb):
        return v
    if isinstance(v, (tuple, list)):
        return acb(to_acb(v[0]).real, to_acb(v[1]).real)
    if isinstance(v, Fraction):
        return acb(v.numerator) / v.denominator
    if isinstance(v, str):
        return to_acb(Fraction(v))
    if isinstance(v, complex):
        return acb(v.real, v.imag)
    return acb(v)


@dataclass(frozen=True)
class BigC:
    value: acb
    prec: int

    @property
    def real(self) -> arb:
        return self.value.real

    @property
    def imag(self) -> arb:
        return self.value.imag

    def __complex__(self) -> complex:
        return complex(self.value)


@dataclass(frozen=True)
class BigMatrix:
    """A square acb matrix tagged with the precision it was computed at."""

    m: acb_mat
    prec: int

    @property
    def n(self) -> int:
        return self.m.nrows()

    def __getitem__(self, idx) -> BigC:
        return BigC(self.m[idx], self.prec)

    def __matmul__(self, other: BigMatrix) -> BigMatrix:
        with precision(min(self.prec, other.prec)):
            return BigMatrix((self.m * other.m).mid(), min(self.prec, other.prec))

    def inverse(self) -> BigMatrix:
        with precision(self.prec):
            return BigMatrix(self.m.inv().mid(), self.prec)

    def trace(self) -> complex:
        with precision(self.prec):
            return complex(self.m.trace())

    def charpoly(self) -> list:
        """Coefficients, leading first."""
        with precision(self.prec):
            cp = self.m.charpoly()
            return [complex(c) for c in reversed(cp.coeffs())]

    def max_deviation(self, other) -> float:
        other_m = other.m if isinstance(other, BigMatrix) else other
        with precision(self.prec):
            d = self.m - other_m
            return max(float(abs(d[i, j]).upper()) for i in range(self.n) for j in range(self.n))

    def identity_deviation(self) -> float:
        with precision(self.prec):
            return self.max_deviation(acb_mat(self.n, self.n, [1 if i == j else 0
                                                               for i in range(self.n) for j in range(self.n)]))

    def det(self) -> complex:
        with precision(self.prec):
            return complex(self.m.det())


def charpoly_of_exact(m: ExactMatrix) -> list:
    coeffs = m.charpoly()
    return [complex(float(c)) for c in coeffs]


def charpoly_deviation(bm: BigMatrix, target: Sequence) -> float:
    """Largest coefficient gap, evaluated in ball arithmetic at the matrix precision."""
    with precision(bm.prec):
        got = list(reversed(bm.m.charpoly().coeffs()))
        return max(float(abs(a - to_acb(b)).upper()) for a, b in zip(got, target))


def unipotent_target(n: int, roots, prec: int = DEFAULT_PREC) -> list:
    """Leading-first coefficients of Π (λ − r)^k from ``{r: k}`` or ``[(r, k), ...]``.

    acb roots are unhashable, so pass those as pairs.
    """
    pairs = roots.items() if isinstance(roots, dict) else roots
    with precision(prec):
        poly = [acb(1)]
        for r, k in pairs:
            r = to_acb(r)
            for _ in range(k):
                poly = [a - r * b for a, b in zip(poly + [acb(0)], [acb(0)] + poly)]
        if len(poly) != n + 1:
            raise ValueError(f"roots give degree {len(poly) - 1}, expected {n}")
        return poly


def root_of_unity(num: int, den: int, prec: int = DEFAULT_PREC) -> acb:
    """``exp(2πi·num/den)``."""
    with precision(prec):
        return acb.exp_pi_i(acb(2 * num) / den)


# ------------------------------------------------------------ paths


@dataclass(frozen=True)
class Line:
    start: tuple
    end: tuple

    def vertices(self) -> list:
        return [tuple(to_acb(c) for c in self.start), tuple(to_acb(c) for c in self.end)]

    @property
    def sagitta_ratio(self) -> float:
        return 0.0


@dataclass(frozen=True)
class Arc:
    """``x = cx + rx e^{2πi(px + wx t)}``, ``y = cy + ry e^{2πi(py + wy t)}`` for t ∈ [0, sweep].

    Traced as an inscribed polygon with ``pieces`` edges.
    """

    center: tuple
    radius: tuple
    phase: tuple = (0, 0)
    winding: tuple = (1, 0)
    sweep: Fraction = Fraction(1)
    pieces: int = 64

    def point(self, t: Fraction) -> tuple:
        out = []
        for c, r, p, w in zip(self.center, self.radius, self.phase, self.winding):
            ang = 2 * (Fraction(p) + Fraction(w) * t)
            out.append(to_acb(c) + to_acb(r) * acb.exp_pi_i(to_acb(ang)))
        return tuple(out)

    def vertices(self) -> list:
        return [self.point(Fraction(self.sweep) * Fraction(k, self.pieces)) for k in range(self.pieces + 1)]

    @property
    def sagitta_ratio(self) -> float:
        # sagitta / chord of one polygon edge, worst coordinate
        w = max(abs(Fraction(v)) for v in self.winding)
        delta = 2 * math.pi * float(w * Fraction(self.sweep)) / self.pieces
        return delta / 8


@dataclass(frozen=True)
class TiedArc:
    """Arc of ``x = cx + r e^{2πi(p + w t)}`` carried along the complex line ``y = slope·x``."""

    center: Fraction
    radius: Fraction
    slope: Fraction
    phase: Fraction = Fraction(0)
    winding: Fraction = Fraction(1)
    pieces: int = 64

    def point(self, t: Fraction) -> tuple:
        ang = 2 * (Fraction(self.phase) + Fraction(self.winding) * t)
        x = to_acb(Fraction(self.center)) + to_acb(Fraction(self.radius)) * acb.exp_pi_i(to_acb(ang))
        return (x, x * to_acb(Fraction(self.slope)))

    def vertices(self) -> list:
        return [self.point(Fraction(k, self.pieces)) for k in range(self.pieces + 1)]

    @property
    def sagitta_ratio(self) -> float:
        return 2 * math.pi * abs(float(self.winding)) / self.pieces / 8


@dataclass
class PathSpec:
    segments: list
    base_point: tuple
    name: str = ""

    def legs(self) -> list:
        """Consecutive vertex pairs with a per-leg sagitta ratio; endpoints are shared exactly."""
        out = []
        prev_end = None
        for seg in self.segments:
            vs = seg.vertices()
            if prev_end is not None:
                if not _close(prev_end, vs[0]):
                    raise ValueError(f"path {self.name!r}: segments are not connected")
                vs[0] = prev_end
            for a, b in zip(vs, vs[1:]):
                out.append((a, b, seg.sagitta_ratio))
            prev_end = vs[-1]
        return out

    def is_closed(self) -> bool:
        legs = self.legs()
        return _close(legs[0][0], legs[-1][1])

    def reversed(self, name: str = "") -> PathSpec:
        segs = []
        for seg in reversed(self.segments):
            segs.append(_ReversedSegment(seg))
        return PathSpec(segs, self.base_point, name or f"{self.name}^-1")

    def then(self, other: PathSpec, name: str = "") -> PathSpec:
        """Traverse ``self`` first, then ``other``."""
        return PathSpec(list(self.segments) + list(other.segments), self.base_point, name)


@dataclass(frozen=True)
class _ReversedSegment:
    inner: object

    def vertices(self) -> list:
        return list(reversed(self.inner.vertices()))

    @property
    def sagitta_ratio(self) -> float:
        return self.inner.sagitta_ratio


def _close(p, q, eps=1e-12) -> bool:
    return all(float(abs(a - b).upper()) < eps for a, b in zip(p, q))


def conjugate(tail: PathSpec, loop: PathSpec, name: str = "") -> PathSpec:
    """``tail^-1 ∘ loop ∘ tail``: walk out along ``tail``, run ``loop``, walk back."""
    return PathSpec(list(tail.segments) + list(loop.segments) + list(tail.reversed().segments),
                    tail.base_point, name)


# ------------------------------------------------------------ numerics


@dataclass
class _Compiled:
    """Polynomial data of a Pfaffian system: singular factors and ``N / den``."""

    n: int
    den: list  # (i, j, Fraction)
    nx: list  # n*n term lists
    ny: list
    factors: list  # squarefree factors of x*y*den as term lists


def _terms(p) -> list:
    return [(i, j, Fraction(int(c.numerator), int(c.denominator))) for (i, j), c in p.terms()]


@lru_cache(maxsize=8)
def _compile(sys: PfaffianSystem) -> _Compiled:
    den, nx, ny = sys.common_denominator()
    n = sys.rank
    ring = den.ring
    x, y = ring.gens
    factors = [x, y] + [f for f, _ in den.sqf_list()[1] if f.degree(x) + f.degree(y) > 0]
    # split further so root-finding sees small-degree, squarefree pieces
    fine = []
    for f in factors:
        for g, _ in f.factor_list()[1]:
            if all(g != h and g != -h for h in fine):
                fine.append(g)
    return _Compiled(n, _terms(den), [_terms(nx[i][j]) for i in range(n) for j in range(n)],
                     [_terms(ny[i][j]) for i in range(n) for j in range(n)], [_terms(f) for f in fine])


def _restrict(terms, xp: list, yp: list) -> acb_poly:
    """Bivariate polynomial composed with x(h), y(h) given by power tables."""
    acc = acb_poly([])
    for i, j, c in terms:
        acc += xp[i] * yp[j] * to_acb(c)
    return acc


def _powers(p: acb_poly, k: int) -> list:
    out = [acb_poly([1])]
    for _ in range(k):
        out.append(out[-1] * p)
    return out


@dataclass
class LegData:
    dpoly: acb_poly
    ppoly: list  # n*n acb_poly entries
    roots: list


def _leg_data(comp: _Compiled, a: tuple, b: tuple, roots_only: bool = False) -> LegData:
    xa, ya = a
    dx, dy = b[0] - a[0], b[1] - a[1]
    xh, yh = acb_poly([xa, dx]), acb_poly([ya, dy])
    deg = max([i + j for t in comp.nx + comp.ny + [comp.den] for i, j, _ in t] + [1]) + 1
    xp, yp = _powers(xh, deg), _powers(yh, deg)
    roots = []
    for f in comp.factors:
        r = _restrict(f, xp, yp)
        if r.degree() < 0:
            raise SingularityTooClose("leg lies inside the singular locus")
        if r.degree() == 0:
            continue
        roots.extend(_poly_roots(r))
    if roots_only:
        return LegData(None, [], roots)
    dpoly = xh * yh * _restrict(comp.den, xp, yp)
    pp = []
    for k in range(comp.n * comp.n):
        pp.append(dx * yh * _restrict(comp.nx[k], xp, yp) + dy * xh * _restrict(comp.ny[k], xp, yp))
    return LegData(dpoly, pp, roots)


def _poly_roots(p: acb_poly) -> list:
    try:
        return list(p.roots())
    except (ValueError, ArithmeticError):
        import mpmath

        with mpmath.workdps(60):
            cs = [mpmath.mpc(complex(c)) for c in reversed(p.coeffs())]
            return [acb(complex(r).real, complex(r).imag) for r in mpmath.polyroots(cs, maxsteps=400, extraprec=200)]


def _dist_to_unit_segment(r: acb) -> float:
    z = complex(r)
    t = min(max(z.real, 0.0), 1.0)
    return abs(z - t)


def _dist_from(h: float, r: acb) -> float:
    return abs(complex(r) - h)


@dataclass
class TransportStats:
    legs: int = 0
    steps: int = 0
    max_order: int = 0
    min_margin: float = math.inf


def _norm(m: acb_mat) -> float:
    n = m.nrows()
    return max(float(abs(m[i, j]).upper()) for i in range(n) for j in range(n))


def _taylor_step(ld: LegData, n: int, hc: acb, s: acb, prec: int, stats: TransportStats) -> acb_mat:
    shift = acb_poly([hc, s])
    d = ld.dpoly(shift).coeffs()
    pcoef = [(s * q)(shift).coeffs() for q in ld.ppoly]
    deg = max(len(c) for c in pcoef)
    pmats = []
    for j in range(deg):
        pmats.append(acb_mat(n, n, [c[j] if j < len(c) else 0 for c in pcoef]))
    if not d or d[0] == 0:
        raise SingularityTooClose("step centre on the singular locus")
    inv_d0 = 1 / d[0]
    eye = acb_mat(n, n, [1 if i == j else 0 for i in range(n) for j in range(n)])
    phi = [eye]
    total = eye
    tiny = 2.0 ** (-(prec + 8))
    small_run = 0
    max_terms = 8 * prec + 64
    for k in range(max_terms):
        acc = acb_mat(n, n)
        for j in range(min(k + 1, len(pmats))):
            acc += pmats[j] * phi[k - j]
        for j in range(1, min(k + 1, len(d) - 1) + 1):
            if k + 1 - j >= 0:
                acc -= phi[k + 1 - j] * (d[j] * (k + 1 - j))
        nxt = (acc * (inv_d0 / (k + 1))).mid()
        phi.append(nxt)
        total += nxt
        size = _norm(nxt)
        if size < tiny * max(1.0, _norm(total)):
            small_run += 1
            if small_run >= 3:
                stats.max_order = max(stats.max_order, k + 1)
                return total.mid()
        else:
            small_run = 0
    raise PrecisionExhausted(f"Taylor series did not converge within {max_terms} terms")


def transport(sys: PfaffianSystem, path: PathSpec, prec_bits: int = DEFAULT_PREC,
              fraction: float = 0.25, step_cap: float = 1.0, margin: float = 1e-12,
              stats: TransportStats | None = None) -> BigMatrix:
    """Transfer matrix ``U`` with ``F(end) = U F(start)`` for every solution ``F``."""
    stats = stats if stats is not None else TransportStats()
    comp = _compile(sys)
    n = comp.n
    work = prec_bits + 32
    with precision(work):
        u = acb_mat(n, n, [1 if i == j else 0 for i in range(n) for j in range(n)])
        for a, b, sag in path.legs():
            ld = _leg_data(comp, a, b)
            stats.legs += 1
            need = max(margin, 2 * sag)
            for r in ld.roots:
                dist = _dist_to_unit_segment(r)
                stats.min_margin = min(stats.min_margin, dist)
                if dist <= need:
                    raise SingularityTooClose(
                        f"singular point at leg parameter {complex(r):.3g} (margin {dist:.3g} <= {need:.3g})")
            h = Fraction(0)
            while h < 1:
                dist = min((_dist_from(float(h), r) for r in ld.roots), default=math.inf)
                step = Fraction(min(fraction * dist, step_cap)).limit_denominator(1 << 40)
                if step >= 1 - h or 1 - h - step < Fraction(1, 1 << 30):
                    step = 1 - h
                phi = _taylor_step(ld, n, to_acb(h), to_acb(step), work, stats)
                u = (phi * u).mid()
                stats.steps += 1
                h += step
        return BigMatrix(u, prec_bits)


# ------------------------------------------------------------ loops and relations


@dataclass
class LoopResult:
    name: str
    matrix: BigMatrix
    charpoly: list
    det: complex
    stats: TransportStats

    def as_dict(self) -> dict:
        return {
            "loop": self.name,
            "charpoly": [[c.real, c.imag] for c in self.charpoly],
            "det": [self.det.real, self.det.imag],
            "prec_bits": self.matrix.prec,
            "steps": self.stats.steps,
            "max_order": self.stats.max_order,
            "min_margin": self.stats.min_margin,
        }


def loop_monodromy(sys: PfaffianSystem, loop: PathSpec, prec_bits: int = DEFAULT_PREC, **kw) -> LoopResult:
    if not loop.is_closed():
        raise ValueError(f"loop {loop.name!r} is not closed")
    stats = TransportStats()
    m = transport(sys, loop, prec_bits, stats=stats, **kw)
    return LoopResult(loop.name, m, m.charpoly(), m.det(), stats)


def word_matrix(word: str, mats: dict) -> BigMatrix:
    """Evaluate ``"E1 * y^-1"`` on numeric loop matrices; the leftmost letter acts last."""
    from .dataset import parse_word

    acc = None
    for name, exp in parse_word(word):
        base = mats[name]
        m = base if exp > 0 else base.inverse()
        for _ in range(abs(exp)):
            acc = m if acc is None else acc @ m
    return acc


@dataclass
class RelationCheck:
    lhs: str
    rhs: str
    deviation: float
    tol: float

    @property
    def verdict(self) -> bool:
        return self.deviation < self.tol


def numeric_relation_check(mats: dict, lhs: str, rhs: str, tol: float = DEFAULT_TOL) -> RelationCheck:
    a, b = word_matrix(lhs, mats), word_matrix(rhs, mats)
    return RelationCheck(lhs, rhs, a.max_deviation(b), tol)


# ------------------------------------------------------------ ℙ³×ℙ³ loops


@lru_cache(maxsize=1)
def p3p3_system() -> PfaffianSystem:
    from .dataset import load_case
    from .series import picard_fuchs

    ops = picard_fuchs(load_case("p3p3"))
    return build_pfaffian([ops[k] for k in sorted(ops)])


def hypergeometric_system(a, b, c) -> PfaffianSystem:
    """``θ(θ + c − 1) − x(θ + a)(θ + b)`` in x, trivially extended by ``θ_y``."""
    from .series import ThetaOperator

    a, b, c = Fraction(a), Fraction(b), Fraction(c)
    # right terms read P(θ)·x, and (θ + a)(θ + b)·x = x(θ + a + 1)(θ + b + 1)
    op = ThetaOperator.from_right_terms({(0, 0): f"tx*(tx + {c - 1})", (1, 0): f"-(tx + {a - 1})*(tx + {b - 1})"})
    return build_pfaffian([op, ThetaOperator.theta("y")], expected_rank=2)


@dataclass(frozen=True)
class LoopPlan:
    """Geometry of the named loops; all distances are exact rationals."""

    base: tuple = (Fraction(1, 128), Fraction(1, 128))
    y_small: Fraction = Fraction(1, 1 << 27)
    e1_center: Fraction = Fraction(1, 4)
    e1_radius: Fraction = Fraction(1, 8)
    pieces: int = 64

    def x_loop(self) -> PathSpec:
        bx, by = self.base
        return PathSpec([Arc((0, by), (bx, 0), (0, 0), (1, 0), 1, self.pieces)], self.base, "x0")

    def y_loop(self) -> PathSpec:
        bx, by = self.base
        return PathSpec([Arc((bx, 0), (0, by), (0, 0), (0, 1), 1, self.pieces)], self.base, "y0")

    def tail_to_e1(self) -> PathSpec:
        bx, by = self.base
        x0 = self.e1_center - self.e1_radius
        return PathSpec([Line((bx, by), (bx, self.y_small)), Line((bx, self.y_small), (x0, self.y_small))],
                        self.base, "tail")

    def e1_ring(self, y_winding: int = 4) -> PathSpec:
        """x runs once around the centre; y winds as the fourth power of the blow-up coordinate."""
        x0 = self.e1_center - self.e1_radius
        seg = Arc((self.e1_center, 0), (self.e1_radius, self.y_small), (Fraction(1, 2), 0),
                  (1, y_winding), 1, self.pieces * max(1, y_winding))
        return PathSpec([seg], (x0, self.y_small), "ring")

    def e1_loop(self, y_winding: int = 4) -> PathSpec:
        return conjugate(self.tail_to_e1(), self.e1_ring(y_winding), "e1" if y_winding == 4 else f"e1[y^{y_winding}]")

    def x_prime_loop(self, radius: Fraction = Fraction(4), upper: bool = True) -> PathSpec:
        """Loop around the line at infinity ``x' = 0`` at fixed small ``y' = y/x``.

        Runs out along ``y = slope·x``, passing the cluster at x = 1/4 above (or below) it,
        then a clockwise-in-x circle, i.e. counter-clockwise in ``x' = 1/x``.
        """
        x0 = self.e1_center - self.e1_radius
        slope = self.y_small / x0
        half = Fraction(1, 2) if upper else Fraction(-1, 2)
        over = TiedArc(self.e1_center, self.e1_radius, slope, Fraction(1, 2), -half,
                       self.pieces // 2)
        x1 = self.e1_center + self.e1_radius
        out = Line((x1, x1 * slope), (radius, radius * slope))
        tail = PathSpec([*self.tail_to_e1().segments, over, out], self.base, "tail-far")
        ring = PathSpec([TiedArc(Fraction(0), radius, slope, Fraction(0), Fraction(-1), self.pieces)],
                        (radius, radius * slope), "ring-far")
        return conjugate(tail, ring, "xp" if upper else "xp-lower")

    def square(self, side: Fraction = Fraction(1, 512)) -> PathSpec:
        bx, by = self.base
        pts = [(bx, by), (bx + side, by), (bx + side, by + side), (bx, by + side), (bx, by)]
        return PathSpec([Line(p, q) for p, q in zip(pts, pts[1:])], self.base, "square")

    def apparent_loop(self) -> PathSpec:
        """Encircles only the point of the line 20x + 12y = 3 at height ``y_small``."""
        x0 = self.e1_center - self.e1_radius
        xa = (3 - 12 * self.y_small) / 20
        r = Fraction(1, 100)
        tail = PathSpec([*self.tail_to_e1().segments, Line((x0, self.y_small), (xa - r, self.y_small))],
                        self.base, "tail-apparent")
        ring = PathSpec([Arc((xa, self.y_small), (r, 0), (Fraction(1, 2), 0), (1, 0), 1, self.pieces)],
                        (xa - r, self.y_small), "ring-apparent")
        return conjugate(tail, ring, "apparent")


def hypergeometric_loop(pieces: int = 64) -> PathSpec:
    base = (Fraction(1, 2), Fraction(1, 2))
    return PathSpec([Arc((0, base[1]), (base[0], 0), (0, 0), (1, 0), 1, pieces)], base, "hyp-x0")


# ------------------------------------------------------------ simultaneous conjugacy


@dataclass
class IntertwinerReport:
    """Solutions ``P`` of ``P·M_g = T_g·P`` for every named generator ``g``."""

    nullity: int
    normalized_det: float
    smallest_singular: float
    convention: str

    @property
    def verdict(self) -> bool:
        return self.nullity > 0 and self.normalized_det > 1e-20


CONVENTIONS = {
    "direct": lambda m: m,
    "inverse": lambda m: m.inverse(),
    "transpose": lambda m: m.T,
    "inverse-transpose": lambda m: m.inverse().T,
}


def intertwiner_check(numeric: dict, exact: dict, convention: str = "direct",
                      dps: int = 40, seed: int = 7) -> IntertwinerReport:
    """Is there an invertible ``P`` conjugating every numeric loop matrix to its exact partner?

    Convention-free up to the chosen normalisation of the exact side, and much sharper
    than word traces when the generators are simultaneously triangular.
    """
    import random

    import mpmath

    names = sorted(numeric)
    ctx = mpmath.mp.clone()
    ctx.dps = dps
    n = numeric[names[0]].n
    rows = []
    for g in names:
        t = CONVENTIONS[convention](exact[g])
        a = [[ctx.mpf(v.numerator) / v.denominator for v in row] for row in t.to_rows()]
        with precision(numeric[g].prec):
            b = [[_to_mpc(ctx, numeric[g].m[i, j]) for j in range(n)] for i in range(n)]
        for i in range(n):
            for j in range(n):
                row = [ctx.mpc(0)] * (n * n)
                for l in range(n):
                    row[i * n + l] += b[l][j]
                    row[l * n + j] -= a[i][l]
                rows.append(row)
    _, sv, v = ctx.svd_c(ctx.matrix(rows))
    svals = [abs(sv[i]) for i in range(n * n)]
    scale = max(svals)
    thresh = scale * ctx.mpf(10) ** (-(dps // 2))
    null = [i for i in range(n * n) if svals[i] < thresh]
    rng = random.Random(seed)
    det = 0.0
    if null:
        p = ctx.matrix(n, n)
        for i in null:
            c = rng.gauss(0, 1)
            for k in range(n * n):
                p[k // n, k % n] += c * ctx.conj(v[i, k])
        det = float(abs(ctx.det(p)) / ctx.mnorm(p, "F") ** n)
    return IntertwinerReport(len(null), det, float(min(svals) / scale), convention)


def _to_mpc(ctx, z: acb):
    return ctx.mpc(ctx.mpf(_arb_str(z.real)), ctx.mpf(_arb_str(z.imag)))


def _arb_str(x: arb) -> str:
    return x.mid().str(60, radius=False)


def plan_from_dataset(spec: dict) -> LoopPlan:
    """Loop geometry from a dataset ``transport`` section."""
    base = tuple(Fraction(v) for v in spec["base_point"])
    return LoopPlan(base, Fraction(spec["y_small"]), Fraction(spec["e1_center"]),
                    Fraction(spec["e1_radius"]), int(spec.get("pieces", 64)))


def named_loop(plan: LoopPlan, name: str, spec: dict | None = None) -> PathSpec:
    spec = spec or {}
    if name == "x0":
        return plan.x_loop()
    if name == "y0":
        return plan.y_loop()
    if name == "e1":
        return plan.e1_loop()
    if name == "xp":
        return plan.x_prime_loop(Fraction(spec.get("far_radius", 4)), spec.get("far_tail", "upper") == "upper")
    if name == "square":
        return plan.square()
    if name == "apparent":
        return plan.apparent_loop()
    raise KeyError(f"unknown loop {name!r}")


_LOOP_CACHE: dict = {}


def p3p3_loop(name: str, prec_bits: int = DEFAULT_PREC) -> LoopResult:
    """Monodromy of a named ℙ³×ℙ³ loop, memoised per (name, precision)."""
    key = (name, prec_bits)
    if key not in _LOOP_CACHE:
        from .dataset import load_case

        spec = load_case("p3p3").section("transport")
        loop = named_loop(plan_from_dataset(spec), name, spec)
        _LOOP_CACHE[key] = loop_monodromy(p3p3_system(), loop, prec_bits)
    return _LOOP_CACHE[key]

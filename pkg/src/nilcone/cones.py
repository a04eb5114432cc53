"""B-side: nilpotent cones, their conjugates, gluing checks and the quotient fan."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

from .dataset import MonodromyDataset, RelationSpec, parse_word
from .errors import NotComposable, NotInQuotientLattice, UnknownGenerator
from .exact_core import (
    ExactMatrix,
    QuadRay,
    eigenrays_2x2,
    primitive_integer_vector,
)
from .hodge import cone_filtration, project_mod_I2


@dataclass(frozen=True)
class NilpotentCone:
    label: str
    generators: tuple  # ExactMatrix, ordered
    names: tuple = ()


# ------------------------------------------------------------ groupoid words


@dataclass(frozen=True)
class Letter:
    name: str
    exp: int | str
    source: str | None = None
    target: str | None = None


@dataclass(frozen=True)
class GroupoidWord:
    """Product of dataset matrices, leftmost factor applied last."""

    letters: tuple

    @classmethod
    def parse(cls, text: str, ds: MonodromyDataset) -> GroupoidWord:
        out = []
        for name, exp in parse_word(text):
            if name not in ds.matrices and name not in ("id", "I"):
                raise UnknownGenerator(f"{ds.name}: unknown matrix {name!r}")
            src = tgt = None
            conn = ds.connections.get(name)
            if conn is not None:
                src, tgt = conn["source"], conn["target"]
                if isinstance(exp, int) and exp < 0:
                    src, tgt = tgt, src
            out.append(Letter(name, exp, src, tgt))
        return cls(tuple(out))

    def check_composable(self) -> None:
        # letters act right to left; an unlabeled letter is a loop anywhere
        here = None
        for letter in reversed(self.letters):
            if letter.source is None:
                continue
            if isinstance(letter.exp, int) and abs(letter.exp) != 1 and letter.source != letter.target:
                raise NotComposable(f"{letter.name}^{letter.exp} is not a loop")
            if here is not None and letter.source != here:
                raise NotComposable(f"{letter.name} starts at {letter.source}, previous factor ends at {here}")
            here = letter.target

    @property
    def endpoints(self) -> tuple:
        labeled = [l for l in self.letters if l.source is not None]
        if not labeled:
            return (None, None)
        return labeled[-1].source, labeled[0].target


def compose_word(word, ds: MonodromyDataset) -> ExactMatrix:
    """Exact product of a composable word (string or :class:`GroupoidWord`)."""
    if isinstance(word, str):
        word = GroupoidWord.parse(word, ds)
    word.check_composable()
    out = ExactMatrix.identity(ds.dimension)
    for letter in word.letters:
        out = out @ ds.evaluate(f"{letter.name}^{letter.exp}" if letter.exp != 1 else letter.name)
    return out


def conjugate_generators(gens: Sequence[ExactMatrix], g: ExactMatrix) -> list:
    """``g^-1 N g`` for each generator."""
    gi = g.inverse()
    return [gi @ n @ g for n in gens]


def delta_correction(target: ExactMatrix, coeffs: Sequence, base: Sequence[ExactMatrix],
                     w2: ExactMatrix) -> tuple:
    """``Δ = target - Σ c_i base_i`` and whether ``Δ`` kills ``W_2``."""
    acc = target
    for c, b in zip(coeffs, base):
        acc = acc - b.scale(c)
    return acc, project_mod_I2(acc, w2).is_zero()


def verify_relation(rel: RelationSpec, ds: MonodromyDataset) -> bool:
    return ds.evaluate(rel.lhs) == ds.evaluate(rel.rhs)


def relation_residual(rel: RelationSpec, ds: MonodromyDataset) -> dict:
    diff = ds.evaluate(rel.lhs) - ds.evaluate(rel.rhs)
    return {f"{i},{j}": str(v) for (i, j), v in diff.nonzero_entries().items()}


# ------------------------------------------------------------ quotient by I2


def w2_basis(ds: MonodromyDataset, point: str | None = None) -> ExactMatrix:
    point = point or next(iter(ds.points))
    gens = [ds.matrix_log(g) for g in ds.points[point]["generators"]]
    return cone_filtration(gens, ds.weight).step(2)


@dataclass(frozen=True)
class QuotientFrame:
    """Coordinates of operators modulo I_2 w.r.t. the images of two base nilpotents."""

    w2: ExactMatrix
    base: tuple  # two ExactMatrix

    @cached_property
    def _system(self) -> ExactMatrix:
        cols = [self._flat(project_mod_I2(b, self.w2)) for b in self.base]
        return ExactMatrix.from_columns(cols)

    @staticmethod
    def _flat(m: ExactMatrix) -> list:
        return [v for row in m.to_rows() for v in row]

    def coords(self, x: ExactMatrix, integral: bool = True) -> tuple:
        target = self._flat(project_mod_I2(x, self.w2))
        a = self._system
        # least-squares-free exact solve: pick two independent rows
        rows = _independent_rows(a)
        sub = a.submatrix(rows, range(a.cols))
        rhs = ExactMatrix([[target[r]] for r in rows])
        sol = sub.inverse() @ rhs
        coeffs = tuple(sol[i, 0] for i in range(a.cols))
        recon = [sum(a[r, k] * coeffs[k] for k in range(a.cols)) for r in range(a.rows)]
        if recon != target:
            raise NotInQuotientLattice("image is not in the span of the base images")
        if integral and any(c.denominator != 1 for c in coeffs):
            raise NotInQuotientLattice(f"coordinates {tuple(str(c) for c in coeffs)} are not integral")
        return coeffs

    def action_matrix(self, g: ExactMatrix) -> ExactMatrix:
        """2x2 matrix M with (g^-1 N_1 g, g^-1 N_2 g) ≡ (N_1, N_2) M mod I_2."""
        cols = [self.coords(n) for n in conjugate_generators(self.base, g)]
        return ExactMatrix.from_columns(cols)


def _independent_rows(a: ExactMatrix) -> list:
    chosen: list = []
    for r in range(a.rows):
        trial = chosen + [r]
        if a.submatrix(trial, range(a.cols)).rank() == len(trial):
            chosen = trial
            if len(chosen) == a.cols:
                return chosen
    raise NotInQuotientLattice("base images are linearly dependent")


def quotient_frame(ds: MonodromyDataset) -> QuotientFrame:
    point = next(iter(ds.points))
    names = ds.points[point]["generators"]
    base = tuple(ds.matrix_log(n) for n in names)
    return QuotientFrame(cone_filtration(list(base), ds.weight).step(2), base)


# ------------------------------------------------------------ chains


@dataclass
class GluingCheck:
    label: str
    holds: bool
    detail: str = ""


@dataclass
class ChainReport:
    case: str
    kind: str
    cones: list
    identities: list = field(default_factory=list)
    adjacency: list = field(default_factory=list)
    extra: list = field(default_factory=list)
    orbit_generator: ExactMatrix | None = None
    base: tuple = ()
    w2: ExactMatrix | None = None

    @property
    def ok(self) -> bool:
        return all(c.holds for c in self.identities + self.adjacency + self.extra)


def _end_rank(mats: Sequence[ExactMatrix]) -> int:
    return ExactMatrix.from_columns([[v for row in m.to_rows() for v in row] for m in mats]).rank()


def adjacency_checks(cones: Sequence[NilpotentCone], frame: QuotientFrame | None = None,
                     span_rank: int = 3) -> list:
    """Neighbours share exactly one generator, span ``span_rank`` dimensions in
    End(V), and their other generators lie on opposite sides of the shared one
    modulo I_2."""
    out = []
    for left, right in zip(cones, cones[1:]):
        shared = [(i, j) for i, a in enumerate(left.generators)
                  for j, b in enumerate(right.generators) if a == b]
        rank = _end_rank(list(left.generators) + list(right.generators))
        ok = len(shared) == 1 and rank == span_rank
        detail = f"shared={len(shared)} rank={rank}"
        if ok and frame is not None and len(left.generators) == 2:
            i, j = shared[0]
            s = frame.coords(left.generators[i])
            a = frame.coords(left.generators[1 - i])
            b = frame.coords(right.generators[1 - j])
            side_a = s[0] * a[1] - s[1] * a[0]
            side_b = s[0] * b[1] - s[1] * b[0]
            ok = side_a * side_b < 0
            detail += f" sides=({side_a},{side_b})"
        out.append(GluingCheck(f"{left.label} | {right.label}", ok, detail))
    return out


def _rho_chain(ds: MonodromyDataset, n_min: int, n_max: int) -> ChainReport:
    spec = ds.section("gluing")
    rho = ds.matrix(spec["rho"])
    rho_inv = rho.inverse()
    cache: dict = {}

    def at(name: str, n: int) -> ExactMatrix:
        key = (name, n)
        if key not in cache:
            g = rho ** n if n >= 0 else rho_inv ** (-n)
            cache[key] = conjugate_generators([ds.nilpotent(name)], g)[0]
        return cache[key]

    cones = []
    for n in range(n_max, n_min - 1, -1):
        for c in spec["cones"]:
            names = tuple(c["generators"])
            cones.append(NilpotentCone(f"{c['label']}({n})", tuple(at(x, n) for x in names), names))
    idents = []
    for n in range(n_min, n_max + 1):
        for rel in spec["identities"]:
            m = n + rel["shift"]
            ok = at(rel["lhs"], n) == at(rel["rhs"], m)
            idents.append(GluingCheck(f"{rel['lhs']}({n}) = {rel['rhs']}({m})", ok, rel.get("anchor", "")))
    frame = quotient_frame(ds)
    report = ChainReport(ds.name, "rho", cones, idents,
                         adjacency_checks(cones, frame, spec.get("span_rank", 3)))
    report.orbit_generator = rho
    report.base, report.w2 = frame.base, frame.w2
    return report


def involution_words(n_min: int, n_max: int) -> list:
    """Chain positions ``k`` in ``[2 n_min - 1, 2 n_max + 1]`` with their conjugating words.

    Position 0 is the identity; stepping right prepends the inverse of the
    generator that fixes the shared ray, stepping left prepends the generator.
    """
    words = {0: []}
    for k in range(1, 2 * n_max + 2):
        gen = "tau1" if k % 2 else "tau2"
        words[k] = [(gen, -1)] + words[k - 1]
    for k in range(-1, 2 * n_min - 2, -1):
        gen = "tau2" if k % 2 else "tau1"
        words[k] = [(gen, 1)] + words[k + 1]
    return [(k, words[k]) for k in sorted(words, reverse=True) if 2 * n_min - 1 <= k <= 2 * n_max + 1]


def _involution_chain(ds: MonodromyDataset, n_min: int, n_max: int, orbit_depth: int = 5) -> ChainReport:
    spec = ds.section("gluing")
    gens = {k: ds.matrix(v) for k, v in spec["generators"].items()}
    base_names = tuple(spec["base_cone"])
    base = tuple(ds.nilpotent(x) for x in base_names)
    frame = quotient_frame(ds)
    cones = []
    for k, word in involution_words(n_min, n_max):
        g = ExactMatrix.identity(ds.dimension)
        for name, e in word:
            g = g @ (gens[name] ** e)
        text = "".join(f"{n}^{e}" if e != 1 else n for n, e in word) or "id"
        cones.append(NilpotentCone(f"[{text}]Sigma", tuple(conjugate_generators(base, g)), base_names))
    extra = []
    for tau, fixed in spec["fixed"].items():
        n_fixed = ds.nilpotent(fixed)
        g = gens[tau]
        ok = all(conjugate_generators([n_fixed], g ** e)[0] == n_fixed
                 for e in range(-orbit_depth, orbit_depth + 1))
        extra.append(GluingCheck(f"{tau}^n({fixed}) = {fixed}, |n| <= {orbit_depth}", ok))
    for tau, g in gens.items():
        sq = frame.action_matrix(g @ g)
        extra.append(GluingCheck(f"{tau}^2 acts trivially mod I2", sq == ExactMatrix.identity(2)))
    report = ChainReport(ds.name, "involutions", cones, [],
                         adjacency_checks(cones, frame, spec.get("span_rank", 3)), extra)
    report.orbit_generator = ds.matrix(spec["product"])
    report.base, report.w2 = frame.base, frame.w2
    return report


def cone_chain(ds: MonodromyDataset, n_min: int, n_max: int) -> ChainReport:
    if n_min > n_max:
        raise ValueError("n_min must not exceed n_max")
    kind = ds.section("gluing", {}).get("kind")
    if kind == "rho":
        return _rho_chain(ds, n_min, n_max)
    if kind == "involutions":
        return _involution_chain(ds, n_min, n_max)
    raise NotComposable(f"{ds.name}: no gluing data")


# ------------------------------------------------------------ quotient fan


def _angle_key(ray: tuple) -> Fraction:
    a, b = ray
    if a + b <= 0:
        raise NotInQuotientLattice(f"ray {ray} leaves the half-plane x + y > 0")
    return Fraction(b - a, a + b)


def order_rays(rays) -> list:
    """Deduplicate and sort counter-clockwise inside the half-plane x + y > 0."""
    return sorted(set(rays), key=_angle_key)


@dataclass
class QuotientFan:
    rays: list  # primitive integer pairs, clockwise to counter-clockwise
    closure: tuple  # two QuadRay
    orbit_matrix: ExactMatrix
    depth_label: str = ""

    @property
    def chambers(self) -> list:
        return list(zip(self.rays, self.rays[1:]))

    def chamber_dets(self) -> list:
        return [a[0] * b[1] - a[1] * b[0] for a, b in self.chambers]


def oriented_closure(m: ExactMatrix) -> tuple:
    """Eigenrays of ``m`` oriented into the half-plane x + y > 0, counter-clockwise last."""
    out = []
    for r in eigenrays_2x2(m):
        s = r.x + r.y
        out.append(r.oriented(s.sign()))
    # clockwise boundary first: smaller (y - x)/(x + y)
    out.sort(key=lambda r: float((r.y - r.x) / (r.x + r.y)))
    return tuple(out)


def quotient_fan(chain: ChainReport, w2: ExactMatrix | None = None) -> QuotientFan:
    frame = QuotientFrame(w2 if w2 is not None else chain.w2, chain.base)
    rays = []
    for cone in chain.cones:
        for n in cone.generators:
            rays.append(primitive_integer_vector(frame.coords(n)))
    orbit = frame.action_matrix(chain.orbit_generator)
    return QuotientFan(order_rays(rays), oriented_closure(orbit), orbit)


# ------------------------------------------------------------ stabilizer


def _free_reduce(word: tuple) -> tuple:
    out: list = []
    for g, e in word:
        if out and out[-1][0] == g:
            e2 = out[-1][1] + e
            out.pop()
            if e2:
                out.append((g, e2))
        else:
            out.append((g, e))
    return tuple(out)


def _in_square_subgroup(word: tuple) -> bool:
    return all(e % 2 == 0 for _, e in _free_reduce(word))


def _mod2_trivial(word: tuple) -> bool:
    """Whether the word dies in Z/2 * Z/2, i.e. lies in the normal closure of the squares."""
    stack: list = []
    for g, e in word:
        for _ in range(abs(e) % 2):
            if stack and stack[-1] == g:
                stack.pop()
            else:
                stack.append(g)
    return not stack


@dataclass
class StabilizerReport:
    words_checked: int
    trivial_words: list
    in_subgroup: list  # trivial words whose reduced form has only even exponents
    outside_subgroup: list
    outside_matrix_members: list  # outside words whose matrix still lies in <g1^2, g2^2>
    closure_agrees: bool  # trivial set == normal closure of squares within the ball
    product_powers_ok: bool
    samples: dict


def stabilizer_probe(ds: MonodromyDataset, max_len: int = 4, power_depth: int = 3) -> StabilizerReport:
    """Classify reduced words in the two generators by their action mod I_2."""
    spec = ds.section("gluing")
    gens = {k: ds.matrix(v) for k, v in spec["generators"].items()}
    frame = quotient_frame(ds)
    act = {(g, s): frame.action_matrix(m ** s) for g, m in gens.items() for s in (1, -1)}
    ident = ExactMatrix.identity(2)
    letters = [(g, s) for g in sorted(gens) for s in (1, -1)]
    trivial, inside, outside = [], [], []
    closure_ok = True
    count = 0
    frontier = [((), ident)]
    for _ in range(max_len):
        nxt = []
        for word, mat in frontier:
            for g, s in letters:
                if word and word[-1] == (g, -s):
                    continue
                w2 = word + ((g, s),)
                # conjugation by a product acts by the reversed product of quotient matrices
                m2 = act[(g, s)] @ mat
                nxt.append((w2, m2))
                count += 1
                is_triv = m2 == ident
                if is_triv:
                    trivial.append(w2)
                    (inside if _in_square_subgroup(w2) else outside).append(w2)
                if is_triv != _mod2_trivial(w2):
                    closure_ok = False
        frontier = nxt
    members = [w for w in outside if _in_square_matrix_group(w, gens)]
    prod = frame.action_matrix(ds.matrix(spec["product"]))
    expected = ExactMatrix(spec["quotient_expected"]["tau12"])
    powers_ok = all(
        frame.action_matrix(ds.matrix(spec["product"]) ** n) == expected ** n
        for n in range(-power_depth, power_depth + 1)
    )
    samples = {f"{g}": act[(g, 1)] for g in sorted(gens)}
    samples["tau12"] = prod
    for g, m in gens.items():
        samples[f"{g}^2"] = frame.action_matrix(m @ m)
    return StabilizerReport(count, trivial, inside, outside, members, closure_ok, powers_ok, samples)


def _in_square_matrix_group(word: tuple, gens: dict) -> bool:
    """Whether the word's matrix equals ±(g1^2)^a (g2^2)^b for integers a, b.

    The squares are commuting unipotents here, so membership is a lattice
    question on their logarithms.
    """
    from .exact_core import is_unipotent, unipotent_log

    names = sorted(gens)
    sq = [gens[n] @ gens[n] for n in names]
    if not all(is_unipotent(m) for m in sq) or sq[0] @ sq[1] != sq[1] @ sq[0]:
        return False
    m = ExactMatrix.identity(sq[0].rows)
    for g, e in word:
        m = m @ (gens[g] ** e)
    logs = [unipotent_log(x) for x in sq]
    cols = ExactMatrix.from_columns([[v for row in x.to_rows() for v in row] for x in logs])
    for cand in (m, -m):
        if not is_unipotent(cand):
            continue
        target = [v for row in unipotent_log(cand).to_rows() for v in row]
        rows = _independent_rows(cols)
        sol = cols.submatrix(rows, range(2)).inverse() @ ExactMatrix([[target[r]] for r in rows])
        coeffs = [sol[i, 0] for i in range(2)]
        recon = [sum(cols[r, k] * coeffs[k] for k in range(2)) for r in range(cols.rows)]
        if recon == target and all(c.denominator == 1 for c in coeffs):
            return True
    return False


def word_text(word: tuple) -> str:
    return " ".join(f"{g}^{e}" if e != 1 else g for g, e in _free_reduce(word)) or "id"


# ------------------------------------------------------------ Δ family


@dataclass
class DeltaFamilyRow:
    n: int
    computed: dict  # "i,j" -> Fraction on the watched block
    printed: dict
    outside_zero: bool  # Δ_n vanishes off the watched block
    kills_w2: bool

    @property
    def mismatches(self) -> dict:
        return {k: (self.printed[k], v) for k, v in self.computed.items() if self.printed[k] != v}


def delta_family(ds: MonodromyDataset, n_min: int = -5, n_max: int = 5) -> list:
    """``Δ_n = g^-n N g^n - (a N + b N_fixed)`` along the orbit of one generator,
    compared with the closed forms given for odd ``n = 2m - 1`` and even ``n = 2m``."""
    import sympy

    spec = ds.section("delta_family")
    g = ds.matrix(spec["generator"])
    moving, fixed = ds.nilpotent(spec["moving"]), ds.nilpotent(spec["fixed"])
    step = ExactMatrix(spec["step_matrix"])
    w2 = w2_basis(ds)
    m_sym = sympy.Symbol("m")
    out = []
    for n in range(n_min, n_max + 1):
        gn = g ** n
        image = gn.inverse() @ moving @ gn
        sn = step ** n
        delta = image - moving.scale(sn[0, 0]) - fixed.scale(sn[1, 0])
        table = spec["odd_printed"] if n % 2 else spec["even_printed"]
        m_val = sympy.Rational(n + 1, 2) if n % 2 else sympy.Rational(n, 2)
        computed, printed = {}, {}
        for a, i in enumerate(spec["rows"]):
            for b, j in enumerate(spec["cols"]):
                computed[f"{i},{j}"] = delta[i, j]
                val = sympy.sympify(table[a][b], locals={"m": m_sym}).subs(m_sym, m_val)
                printed[f"{i},{j}"] = Fraction(int(sympy.numer(val)), int(sympy.denom(val)))
        block = {(i, j) for i in spec["rows"] for j in spec["cols"]}
        outside = all(k in block for k in delta.nonzero_entries())
        out.append(DeltaFamilyRow(n, computed, printed, outside, project_mod_I2(delta, w2).is_zero()))
    return out

from __future__ import annotations

import sympy
import pytest
from hypothesis import given, strategies as st

from nilcone.cones import (
    cone_chain,
    delta_correction,
    order_rays,
    quotient_fan,
    stabilizer_probe,
    verify_relation,
    w2_basis,
)
from nilcone.dataset import RelationSpec, load_case
from nilcone.errors import NotInQuotientLattice
from nilcone.exact_core import ExactMatrix, QuadNum, span, subspace_equal

CASES = ("p4p4", "p3p3", "k3")


@pytest.fixture(scope="module")
def fans():
    out = {}
    for case in CASES:
        chain = cone_chain(load_case(case), -5, 5)
        out[case] = (chain, quotient_fan(chain))
    return out


@pytest.mark.parametrize("case", CASES)
def test_chain_identities_and_adjacency(fans, case):
    chain, _ = fans[case]
    assert chain.identities or chain.adjacency
    bad = [c.label for c in chain.identities + chain.adjacency if not c.holds]
    assert not bad


@pytest.mark.parametrize("case", CASES)
def test_fan_is_unimodular_and_ordered(fans, case):
    _, fan = fans[case]
    assert all(d == 1 for d in fan.chamber_dets())
    assert order_rays(fan.rays) == fan.rays


def _sympy_slopes(m: ExactMatrix) -> set:
    """Slopes y/x of eigenvectors, computed by sympy independently of QuadNum."""
    a, b, c, d = (sympy.Rational(str(v)) for v in (m[0, 0], m[0, 1], m[1, 0], m[1, 1]))
    lam = sympy.symbols("lam")
    out = set()
    for root in sympy.solve(lam ** 2 - (a + d) * lam + (a * d - b * c), lam):
        out.add(sympy.nsimplify(sympy.simplify((root - a) / b)))
    return out


# closure slopes derived by hand from the orbit matrices and frozen
CLOSURE = {
    "p4p4": {QuadNum(-2, 1, 3), QuadNum(-2, -1, 3)},
    "p3p3": {QuadNum(-3, 2, 2), QuadNum(-3, -2, 2)},
    "k3": {QuadNum(sympy.Rational(-3, 2), sympy.Rational(1, 2), 5),
           QuadNum(sympy.Rational(-3, 2), sympy.Rational(-1, 2), 5)},
}


@pytest.mark.parametrize("case", CASES)
def test_closure_rays_exact(fans, case):
    _, fan = fans[case]
    slopes = {r.slope() for r in fan.closure}
    assert slopes == CLOSURE[case]
    sym = _sympy_slopes(fan.orbit_matrix)
    assert {sympy.nsimplify(sympy.Rational(str(s.a)) + sympy.Rational(str(s.b)) * sympy.sqrt(s.d))
            for s in slopes} == sym
    for r in fan.closure:
        assert float(r.x + r.y) > 0


@pytest.mark.parametrize("case", CASES)
def test_rays_lie_between_closure_rays(fans, case):
    _, fan = fans[case]
    lo, hi = fan.closure
    d = lo.x.d if hasattr(lo.x, "d") else lo.y.d
    k_lo, k_hi = ((r.y - r.x) / (r.x + r.y) for r in (lo, hi))
    for x, y in fan.rays:
        k = QuadNum(sympy.Rational(y - x, x + y), 0, d)
        assert k_lo < k < k_hi


@pytest.mark.parametrize("case", CASES)
def test_orbit_matrix_permutes_rays(fans, case):
    _, fan = fans[case]
    m = fan.orbit_matrix
    rays = set(fan.rays)
    hits = 0
    for x, y in fan.rays:
        img = (m[0, 0] * x + m[0, 1] * y, m[1, 0] * x + m[1, 1] * y)
        img = tuple(int(v) for v in img)
        hits += img in rays or tuple(-v for v in img) in rays
    # all but the few rays at the ends of the finite chain map back into the chain
    assert hits >= len(fan.rays) - 4
    assert abs(m.det()) == 1


def test_tau12_quotient_matrix(fans):
    _, fan = fans["p3p3"]
    assert fan.orbit_matrix == ExactMatrix([[35, 6], [-6, -1]])


def test_order_rays_rejects_lower_half_plane():
    with pytest.raises(NotInQuotientLattice):
        order_rays([(1, 0), (-1, -1)])


def test_delta_prime_by_hand():
    """N1' - (4 N2 - N1), restricted to the first three coordinates, must vanish."""
    ds = load_case("p4p4")
    n = ds.nilpotents
    delta = n["N1p"] - (n["N2"].scale(4) - n["N1"])
    entries = {f"{i},{j}": v for (i, j), v in delta.nonzero_entries().items()}
    assert entries == {"0,4": 25, "0,5": sympy.Rational(-25, 3), "1,4": -50, "1,5": 25}
    assert all(j >= 3 for (_, j) in delta.nonzero_entries())
    assert subspace_equal(w2_basis(ds), span([1, 0, 0, 0, 0, 0], [0, 1, 0, 0, 0, 0], [0, 0, 1, 0, 0, 0]))


@given(st.integers(0, 5), st.integers(0, 2), st.integers(1, 9))
def test_delta_correction_detects_w2_action(col_row, w2_col, value):
    ds = load_case("p3p3")
    w2 = w2_basis(ds)
    bump = ExactMatrix.unit(6, col_row, w2_col, value)
    _, kills = delta_correction(bump, [], [], w2)
    assert not kills


def test_verify_relation_negative(k3):
    assert not verify_relation(RelationSpec("bogus", "Tx", "Ty"), k3)


def test_stabilizer_probe_shape():
    rep = stabilizer_probe(load_case("p3p3"), max_len=3)
    assert rep.closure_agrees
    assert rep.words_checked > 0
    assert set(map(str, rep.outside_subgroup)) <= set(map(str, rep.trivial_words))

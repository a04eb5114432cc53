from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from nilcone.birational import (
    DivisorClass,
    PullbackMap,
    closure_expected,
    fundamental_walls,
    has_rational_fixed_ray,
    identity_checks,
    mirror_compare,
    movable_chambers,
    positive_cone_boundary,
    rho_star,
)
from nilcone.cones import cone_chain, quotient_fan
from nilcone.dataset import load_case
from nilcone.errors import DepthMismatch, InconsistentDataset, Singular
from nilcone.exact_core import ExactMatrix, QuadNum

# walls of the three Kähler chambers, pulled back by hand
WALLS = {
    "p4p4": [(4, -1), (1, 0), (0, 1), (-1, 4)],
    "p3p3": [(6, -1), (1, 0), (0, 1), (-1, 6)],
}
ORBIT = {"p4p4": [[-4, -15], [15, 56]], "p3p3": [[35, 6], [-6, -1]]}


@pytest.mark.parametrize("case", sorted(WALLS))
def test_fundamental_walls(case):
    assert fundamental_walls(load_case(case)) == WALLS[case]


@pytest.mark.parametrize("case", sorted(ORBIT))
def test_orbit_map(case):
    m = rho_star(load_case(case)).matrix
    assert m == ExactMatrix(ORBIT[case])
    assert m.det() == 1
    assert not has_rational_fixed_ray(m)


def test_identities_replay():
    res = identity_checks(load_case("p4p4"))
    assert res and all(ok for _, ok in res)


@pytest.mark.parametrize("case", sorted(WALLS))
@pytest.mark.parametrize("depth", [0, 1, 2, 3])
def test_mirror_agrees(case, depth):
    ds = load_case(case)
    a_fan = movable_chambers(ds, depth)
    b_fan = quotient_fan(cone_chain(ds, -depth, depth))
    res = mirror_compare(a_fan, b_fan, ds.section("a_side")["mirror_dictionary"], depth)
    assert res.verdict
    assert a_fan.cross_signs_monotone()


@pytest.mark.parametrize("case", sorted(WALLS))
def test_swapped_dictionary_fails(case):
    ds = load_case(case)
    a_fan = movable_chambers(ds, 3)
    b_fan = quotient_fan(cone_chain(ds, -3, 3))
    res = mirror_compare(a_fan, b_fan, {"H1": "N2", "H2": "N1"}, 3)
    assert not res.verdict


def test_depth_mismatch():
    ds = load_case("p3p3")
    with pytest.raises(DepthMismatch):
        mirror_compare(movable_chambers(ds, 2), quotient_fan(cone_chain(ds, -3, 3)),
                       {"H1": "N1", "H2": "N2"}, 3)


@pytest.mark.parametrize("case", sorted(WALLS))
def test_closure_matches_printed(case):
    ds = load_case(case)
    fan = movable_chambers(ds, 2)
    printed = closure_expected(ds)
    assert len(printed) == 2
    for got in fan.closure:
        assert any(got.is_parallel(p) for p in printed)


def test_k3_positive_cone():
    lo, hi = positive_cone_boundary([[4, 6], [6, 4]])
    want = {QuadNum(Fraction(-3, 2), Fraction(1, 2), 5), QuadNum(Fraction(-3, 2), Fraction(-1, 2), 5)}
    assert {lo.slope(), hi.slope()} == want
    with pytest.raises(InconsistentDataset):
        positive_cone_boundary([[1, 0], [0, 1]])
    with pytest.raises(InconsistentDataset):
        positive_cone_boundary([[0, 1], [1, 0]])


small = st.integers(-5, 5)


def _word_matrix(steps) -> tuple:
    """Product of elementary shears and a sign flip: always in GL2(Z)."""
    m = ExactMatrix.identity(2)
    for kind, k in steps:
        e = {0: [[1, k], [0, 1]], 1: [[1, 0], [k, 1]], 2: [[1, 0], [0, -1]]}[kind]
        m = m @ ExactMatrix(e)
    return (m[0, 0], m[0, 1], m[1, 0], m[1, 1])


unimodular = st.lists(st.tuples(st.integers(0, 2), small), max_size=4).map(_word_matrix)


@given(unimodular, unimodular, st.tuples(small, small))
def test_pullback_algebra(m1, m2, v):
    f = PullbackMap("f", ExactMatrix([[m1[0], m1[1]], [m1[2], m1[3]]]))
    g = PullbackMap("g", ExactMatrix([[m2[0], m2[1]], [m2[2], m2[3]]]))
    d = DivisorClass(v)
    assert f.compose(g)(d).coords == f(g(d)).coords
    assert f.inverse()(f(d)).coords == d.coords
    assert f.is_lattice_automorphism


def test_singular_pullback():
    with pytest.raises(Singular):
        PullbackMap("z", ExactMatrix([[1, 2], [2, 4]]))
    with pytest.raises(InconsistentDataset):
        PullbackMap("big", ExactMatrix.identity(3))

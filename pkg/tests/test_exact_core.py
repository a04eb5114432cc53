from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from nilcone.errors import (
    DimensionMismatch,
    MixedRadicand,
    NotQuasiUnipotent,
    NotTwoByTwo,
    NotUnipotent,
    RationalSpectrum,
    Singular,
)
from nilcone.exact_core import (
    BilinearForm,
    ExactMatrix,
    QuadNum,
    apply_2x2,
    dual_action,
    eigenrays_2x2,
    is_unipotent,
    nilpotency_index,
    nilpotent_exp,
    preserves_form,
    primitive_integer_vector,
    quasi_unipotency_order,
    span,
    standard_symplectic_form,
    subspace_equal,
    subspace_intersection,
    subspace_sum,
    unipotent_log,
)

small = st.integers(min_value=-4, max_value=4)


def strict_lower(n: int):
    """Strictly lower-triangular integer matrices: nilpotent by construction."""
    return st.lists(small, min_size=n * (n - 1) // 2, max_size=n * (n - 1) // 2).map(
        lambda vals: ExactMatrix([[vals[i * (i - 1) // 2 + j] if j < i else 0 for j in range(n)]
                                  for i in range(n)]))


def transvection(form: BilinearForm, v, c) -> ExactMatrix:
    """x -> x + c <v, x> v preserves an alternating form."""
    n = form.dimension
    col = ExactMatrix([[x] for x in v])
    row = col.T @ form.gram
    return ExactMatrix.identity(n) + (col @ row).scale(c)


def test_basic_algebra():
    a = ExactMatrix([[1, 2], [3, 4]])
    assert a @ a.inverse() == ExactMatrix.identity(2)
    assert a.det() == -2
    assert a.trace() == 5
    assert (a - a).is_zero()
    assert ExactMatrix([["1/2", "-44/3"], [0, 1]])[0, 1] == Fraction(-44, 3)
    with pytest.raises(DimensionMismatch):
        a @ ExactMatrix.identity(3)


def test_singular_inverse():
    with pytest.raises(Singular):
        ExactMatrix([[1, 2], [2, 4]]).inverse()


def test_standard_form_is_antidiagonal():
    j = standard_symplectic_form(6)
    assert j.gram[0, 5] == 1 and j.gram[2, 3] == 1 and j.gram[3, 2] == -1 and j.gram[5, 0] == -1


@given(st.lists(st.tuples(st.lists(small, min_size=6, max_size=6), small), min_size=1, max_size=4))
def test_products_of_transvections_are_symplectic(parts):
    form = standard_symplectic_form(6)
    m = ExactMatrix.identity(6)
    for v, c in parts:
        m = m @ transvection(form, v, c)
    assert preserves_form(m, form)
    assert preserves_form(dual_action(m), form)
    assert m.det() == 1


@given(strict_lower(5))
def test_log_exp_round_trip(n):
    m = nilpotent_exp(n)
    assert is_unipotent(m)
    assert unipotent_log(m) == n
    assert nilpotent_exp(unipotent_log(m)) == m


@given(strict_lower(4), strict_lower(4))
def test_nilpotency_index_bounds(a, b):
    k = nilpotency_index(a)
    assert k is not None and 1 <= k <= 4
    assert (a ** k).is_zero()
    if k > 1:
        assert not (a ** (k - 1)).is_zero()


def test_unipotent_log_rejects_non_unipotent():
    with pytest.raises(NotUnipotent):
        unipotent_log(ExactMatrix([[2, 0], [0, 1]]))


def test_quasi_unipotency():
    assert quasi_unipotency_order(ExactMatrix([[-1, 1], [0, -1]])) == 2
    with pytest.raises(NotQuasiUnipotent):
        quasi_unipotency_order(ExactMatrix([[2, 0], [0, 1]]))


def test_subspaces():
    u = span([1, 0, 0], [0, 1, 0])
    v = span([0, 1, 0], [0, 0, 1])
    assert subspace_equal(subspace_intersection(u, v), span([0, 2, 0]))
    assert subspace_equal(subspace_sum(u, v), ExactMatrix.identity(3))


@given(st.lists(st.integers(-50, 50), min_size=2, max_size=4).filter(any), st.integers(1, 9))
def test_primitive_vector(v, k):
    p = primitive_integer_vector([Fraction(x * k, 7) for x in v])
    assert p == primitive_integer_vector(v)
    from math import gcd

    g = 0
    for x in p:
        g = gcd(g, x)
    assert g == 1


quad = st.builds(lambda a, b: QuadNum(Fraction(a), Fraction(b), 2), st.integers(-20, 20), st.integers(-20, 20))


@given(quad, quad, quad)
def test_quadnum_field_laws(x, y, z):
    assert (x + y) + z == x + (y + z)
    assert x * (y + z) == x * y + x * z
    assert x * y == y * x
    if x != 0:
        assert (y / x) * x == y
    assert x.norm() == (x * x.conjugate()).a


@given(quad, quad)
def test_quadnum_order_matches_float(x, y):
    if x != y:
        assert (x < y) == (float(x) < float(y))


def test_mixed_radicand():
    with pytest.raises(MixedRadicand):
        QuadNum(0, 1, 2) + QuadNum(0, 1, 3)


def test_eigenrays_exact():
    m = ExactMatrix([[-4, -15], [15, 56]])
    for r in eigenrays_2x2(m):
        img = apply_2x2(m, r)
        assert img.is_parallel(r)
        assert img.x == r.x * r.eigenvalue
    big, small_ = eigenrays_2x2(m)
    assert float(big.eigenvalue) > float(small_.eigenvalue)
    assert str(big.slope()) in ("-2-√3", "-2+√3")


@given(st.integers(-6, 6), st.integers(-6, 6), st.integers(-6, 6), st.integers(-6, 6))
def test_eigenrays_property(p, q, r, s):
    m = ExactMatrix([[p, q], [r, s]])
    try:
        rays = eigenrays_2x2(m)
    except RationalSpectrum:
        return
    for ray in rays:
        assert apply_2x2(m, ray).is_parallel(ray)


def test_eigenrays_errors():
    with pytest.raises(RationalSpectrum):
        eigenrays_2x2(ExactMatrix([[2, 0], [0, 3]]))
    with pytest.raises(NotTwoByTwo):
        eigenrays_2x2(ExactMatrix.identity(3))


def test_form_validation():
    with pytest.raises(ValueError):
        BilinearForm(ExactMatrix([[0, 1], [2, 0]]), -1)
    with pytest.raises(DimensionMismatch):
        preserves_form(ExactMatrix.identity(4), standard_symplectic_form(6))

from __future__ import annotations

import pytest
import sympy

from nilcone.errors import WrongHolonomicRank
from nilcone.pfaffian import build_pfaffian
from nilcone.series import ThetaOperator
from nilcone.transport import hypergeometric_system, p3p3_system


def test_p3p3_system_rank_and_flatness():
    sys = p3p3_system()
    assert sys.rank == 6
    assert sys.basis[0] == (0, 0)
    assert sys.is_flat()


def test_hypergeometric_rank_two():
    sys = hypergeometric_system(1, 1, 2)
    assert sys.rank == 2
    assert sys.is_flat()


def test_hypergeometric_connection_by_hand():
    """θF = A F with F = (f, θf): A = [[0, 1], [a b x/(1-x), (x(a+b) - (c-1))/(1-x)]]."""
    a, b, c = sympy.Rational(1, 2), sympy.Rational(1, 2), sympy.Rational(1, 3)
    x = sympy.Symbol("x")
    got = hypergeometric_system(a, b, c).sympy_matrix("x")
    want = sympy.Matrix([[0, 1], [a * b * x / (1 - x), ((a + b) * x - (c - 1)) / (1 - x)]])
    assert sympy.simplify(got.subs(sympy.Symbol("x"), x) - want) == sympy.zeros(2, 2)


def test_rank_mismatch():
    with pytest.raises(WrongHolonomicRank):
        hypergeometric_system_wrong_rank()


def hypergeometric_system_wrong_rank():
    op = ThetaOperator.from_right_terms({(0, 0): "tx*(tx - 2/3)", (1, 0): "-(tx + 1/2)**2"})
    return build_pfaffian([op, ThetaOperator.theta("y")], expected_rank=3)


def test_empty_operator_set():
    with pytest.raises(WrongHolonomicRank):
        build_pfaffian([])


def test_underdetermined_system():
    # θ_x alone leaves every power of θ_y standard
    with pytest.raises(WrongHolonomicRank):
        build_pfaffian([ThetaOperator.theta("x")], expected_rank=None, max_order=4)

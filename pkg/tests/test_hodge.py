from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from nilcone.dataset import load_case
from nilcone.errors import NotNilpotent, WrongCenter
from nilcone.exact_core import ExactMatrix, span, subspace_dim, subspace_equal
from nilcone.hodge import (
    cone_filtration,
    extract_couplings,
    lcsl_verify,
    lcsl_verify_matrices,
    lowers_weight,
    reference_nilpotent,
    weight_filtration,
)

THREEFOLD_POINTS = [("p4p4", "o1"), ("p4p4", "o2"), ("p4p4", "o3"), ("p3p3", "o")]
ALL_POINTS = THREEFOLD_POINTS + [("k3", "o1"), ("k3", "o2"), ("k3", "o3")]

positive = st.integers(min_value=1, max_value=30)


def _logs(case, point):
    ds = load_case(case)
    return ds, [ds.matrix_log(g) for g in ds.points[point]["generators"]]


def _graded_iso(n: ExactMatrix, w, k: int, center: int) -> bool:
    """n^k : Gr_{center+k} -> Gr_{center-k} is an isomorphism (ranks only)."""
    hi, lo = w.step(center + k), w.step(center + k - 1)
    tgt_hi, tgt_lo = w.step(center - k), w.step(center - k - 1)
    d_src = subspace_dim(hi) - subspace_dim(lo)
    d_tgt = subspace_dim(tgt_hi) - subspace_dim(tgt_lo)
    if d_src != d_tgt:
        return False
    if d_src == 0:
        return True
    img = (n ** k) @ hi
    joined = ExactMatrix.hstack(img, tgt_lo) if tgt_lo is not None else img
    return joined.rank() - subspace_dim(tgt_lo) == d_tgt


@pytest.mark.parametrize("case,point", ALL_POINTS)
@given(lam=st.tuples(positive, positive))
def test_filtration_is_independent_of_interior_weights(case, point, lam):
    ds, logs = _logs(case, point)
    ref = cone_filtration(logs, ds.weight)
    w = cone_filtration(logs, ds.weight, list(lam))
    assert w.same_as(ref)
    n = logs[0].scale(lam[0]) + logs[1].scale(lam[1])
    assert lowers_weight(n, w)
    for g in logs:
        assert lowers_weight(g, w)
    for k in range(1, ds.weight + 1):
        assert _graded_iso(n, w, k, ds.weight)


@pytest.mark.parametrize("case,point", THREEFOLD_POINTS)
def test_threefold_dims_and_w2(case, point):
    ds, logs = _logs(case, point)
    for lam in ((1, 1), (1, 2), (3, 1), (7, 2)):
        w = cone_filtration(logs, 3, list(lam))
        assert w.dims() == (1, 3, 5, 6)
        assert subspace_equal(w.step(2), span([1, 0, 0, 0, 0, 0], [0, 1, 0, 0, 0, 0], [0, 0, 1, 0, 0, 0]))


def test_k3_dims():
    ds, logs = _logs("k3", "o1")
    assert cone_filtration(logs, 2).dims() == (1, 3, 4)


# m-matrix determinants, recomputed by hand from the printed logs and frozen
M_DET = {("p4p4", "o1"): -350, ("p4p4", "o2"): 350, ("p3p3", "o"): -160, ("k3", "o1"): -20}


@pytest.mark.parametrize("key", sorted(M_DET))
def test_lcsl_verdicts(key):
    rep = lcsl_verify(load_case(key[0]), key[1])
    assert rep.verdict
    assert rep.m_det == M_DET[key]


def test_lcsl_negative_control_non_unipotent():
    ds = load_case("p3p3")
    rep = lcsl_verify_matrices("bad", [ds.matrix("TE1"), ds.matrix("Ty")], 3)
    assert not rep.verdict
    assert "not unipotent" in rep.notes[0]


def test_lcsl_negative_control_degenerate_cone():
    ds = load_case("p4p4")
    tx = ds.matrix("Tx")
    rep = lcsl_verify_matrices("same", [tx, tx], 3)
    assert not rep.verdict


def test_weight_filtration_errors():
    with pytest.raises(NotNilpotent):
        weight_filtration(ExactMatrix.identity(3), 1)
    jordan = ExactMatrix([[0, 1, 0], [0, 0, 1], [0, 0, 0]])
    with pytest.raises(WrongCenter):
        weight_filtration(jordan, 1)
    assert weight_filtration(jordan, 2).dims() == (1, 2, 3)


@given(st.integers(2, 6))
def test_single_jordan_block(size):
    n = ExactMatrix([[1 if j == i + 1 else 0 for j in range(size)] for i in range(size)])
    w = weight_filtration(n, size - 1)
    assert w.dims(range(0, 2 * size - 1, 2)) == tuple(range(1, size + 1))
    assert lowers_weight(n, w)


def test_couplings_are_symmetric_cubic_forms():
    ds = load_case("p3p3")
    n = ds.nilpotents
    c = extract_couplings([n["N1"], n["N2"]], reference_nilpotent(ds))
    assert c.as_tuple() == (2, 6, 6, 2)
    assert c[(0, 1, 0)] == c[(1, 0, 0)] == 6

import numpy as np
import pytest

from gamma_dilation.checks import check_gamma333, check_isometry333
from gamma_dilation.dilation import (build_coisometric_312, build_coisometric_333,
                                     build_schaffer_312, build_schaffer_333, verify_dilation)
from gamma_dilation.fundamental import (FundamentalSet333, solve_fundamental_312,
                                        solve_fundamental_333)
from gamma_dilation.generators import diagonal_model, unitary_model
from gamma_dilation.linalg import adj, op_norm


def test_scalar_schaffer_shape_and_shift():
    tup = diagonal_model("gamma333", 1, 2)
    x7 = tup[6][0, 0]
    dil = build_schaffer_333(tup, solve_fundamental_333(tup), depth=6)
    V7 = dil.operators[6]
    assert V7.shape == (7, 7)
    col = np.zeros(7, dtype=complex)
    col[0], col[1] = x7, np.sqrt(1 - abs(x7) ** 2)
    assert np.allclose(V7[:, 0], col, atol=1e-15)
    assert np.allclose(V7[2:, 1:-1], np.eye(5))
    assert verify_dilation(dil, tup, tol=1e-10).passed


def test_scalar_schaffer_312():
    tup = diagonal_model("gamma312", 1, 2)
    dil = build_schaffer_312(tup, solve_fundamental_312(tup), depth=6)
    assert dil.operators[0].shape == (7, 7)
    assert verify_dilation(dil, tup, tol=1e-10).passed


def test_unitary_input_unchanged():
    tup = unitary_model("gamma333", 3, 1)
    dil = build_schaffer_333(tup, solve_fundamental_333(tup), depth=8)
    assert dil.defect_rank == 0 and dil.dim == 3
    for a, b in zip(dil.operators.operators, tup.operators):
        assert np.array_equal(a, b)
    tup = unitary_model("gamma312", 2, 1)
    dil = build_schaffer_312(tup, solve_fundamental_312(tup), depth=8)
    assert dil.dim == 2


def test_diagonal_dim4_depth8_both_families():
    for fam, solve, build in (("gamma333", solve_fundamental_333, build_schaffer_333),
                              ("gamma312", solve_fundamental_312, build_schaffer_312)):
        tup = diagonal_model(fam, 4, 3, rotate=True)
        dil = build(tup, solve(tup), depth=8)
        rep = verify_dilation(dil, tup)
        assert rep.passed, rep.to_text()


def test_coisometric_is_adjoint_of_schaffer_of_adjoint():
    tup = diagonal_model("gamma333", 3, 7, rotate=True)
    fa = solve_fundamental_333(tup.adjoint())
    co = build_coisometric_333(tup, fa, depth=5)
    sch = build_schaffer_333(tup.adjoint(), fa, depth=5)
    for A, B in zip(co.operators.operators, sch.operators.operators):
        assert np.array_equal(A, adj(B))
    # coefficient dimension equals rank of the defect of T7^H
    assert co.defect_rank == fa.rank
    assert verify_dilation(co, tup).passed
    tup = diagonal_model("gamma312", 3, 7, rotate=True)
    co = build_coisometric_312(tup, solve_fundamental_312(tup.adjoint()), depth=5)
    assert verify_dilation(co, tup).passed


def test_truncation_only_breaks_boundary():
    tup = diagonal_model("gamma333", 2, 5)
    dil = build_schaffer_333(tup, solve_fundamental_333(tup), depth=6)
    V = dil.operators.operators
    k = dil.interior_dim
    G = adj(V[6]) @ V[6] - np.eye(dil.dim)
    assert op_norm(G[:k, :k]) < 1e-14
    assert op_norm(G) > 0.1
    assert check_isometry333(dil.operators, interior=k).passed


def test_truncated_dilation_passes_gamma_battery():
    tup = diagonal_model("gamma333", 2, 5)
    dil = build_schaffer_333(tup, solve_fundamental_333(tup), depth=6)
    assert check_gamma333(dil.operators).passed


def test_corrupted_fundamentals_break_commutators():
    tup = diagonal_model("gamma333", 2, 11)
    fs = solve_fundamental_333(tup)
    F = list(fs.F)
    F[0] = F[0] + np.array([[0, 0.3], [0, 0]])
    F[1] = F[1] + np.array([[0, 0], [0.3, 0]])
    bad = FundamentalSet333(fs.defect, fs.residuals, fs.status, fs.scale, [], fs.method, F)
    dil = build_schaffer_333(tup, bad, depth=6)
    assert not dil.hypotheses.passed
    rep = verify_dilation(dil, tup)
    item = rep.item("commutators (interior)")
    assert item.status == "fail" and item.value > 1e-3


def test_depth_validation():
    from gamma_dilation.errors import InputError
    tup = diagonal_model("gamma333", 1, 0)
    with pytest.raises(InputError):
        build_schaffer_333(tup, solve_fundamental_333(tup), depth=0)

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gamma_dilation.checks import check_gamma333
from gamma_dilation.fundamental import (CONSISTENT, INCONSISTENT, check_dilation_hypotheses_312,
                                        check_dilation_hypotheses_333, hypotheses_312,
                                        hypotheses_333, solve_fundamental_312,
                                        solve_fundamental_333, verify_lemma_identities_312,
                                        verify_lemma_identities_333)
from gamma_dilation.generators import diagonal_model, unitary_model
from gamma_dilation.linalg import numerical_radius, op_norm
from gamma_dilation.tuples import OperatorTuple


def scalar_tuple(family, x):
    return OperatorTuple(family, [np.array([[v]], dtype=complex) for v in x])


def oracle_333(x):
    x = [complex(v) for v in x]
    d = 1 - abs(x[6]) ** 2
    return [(x[i] - x[5 - i].conjugate() * x[6]) / d for i in range(6)]


def oracle_312(p):
    x1, x2, x3, y1, y2 = (complex(v) for v in p)
    d = 1 - abs(x3) ** 2
    return [(x1 - y2.conjugate() * x3) / d, (x2 - y1.conjugate() * x3) / (2 * d),
            (y1 - x2.conjugate() * x3) / (2 * d), (y2 - x1.conjugate() * x3) / d]


def test_scalar_333_matches_closed_form():
    tup = diagonal_model("gamma333", 1, 3)
    x = [M[0, 0] for M in tup.operators]
    fs = solve_fundamental_333(tup)
    got = [fs.full(i)[0, 0] for i in range(1, 7)]
    assert np.allclose(got, oracle_333(x), rtol=1e-12, atol=0)
    assert verify_lemma_identities_333(tup, fs, 1e-12).passed
    assert check_dilation_hypotheses_333(fs).passed


def test_scalar_312_matches_closed_form():
    tup = diagonal_model("gamma312", 1, 3)
    p = [M[0, 0] for M in tup.operators]
    gs = solve_fundamental_312(tup)
    got = [gs.full(n)[0, 0] for n in ("G1", "G2", "Gt1", "Gt2")]
    assert np.allclose(got, oracle_312(p), rtol=1e-12, atol=0)
    assert verify_lemma_identities_312(tup, gs, 1e-12).passed
    assert check_dilation_hypotheses_312(gs).passed


def test_unitary_input_has_rank_zero():
    fs = solve_fundamental_333(unitary_model("gamma333", 3, 2))
    assert fs.rank == 0 and fs.status == CONSISTENT
    assert verify_lemma_identities_333(unitary_model("gamma333", 3, 2), fs).passed
    gs = solve_fundamental_312(unitary_model("gamma312", 3, 2))
    assert gs.rank == 0 and gs.status == CONSISTENT


def test_diagonal_model_dim4():
    tup = diagonal_model("gamma333", 4, 6)
    fs = solve_fundamental_333(tup)
    assert max(fs.residuals) <= 1e-10
    for F in fs.F:
        assert op_norm(F - np.diag(np.diag(F))) < 1e-10
    assert verify_lemma_identities_333(tup, fs, 1e-10).passed
    assert check_dilation_hypotheses_333(fs).passed
    tup = diagonal_model("gamma312", 4, 6)
    gs = solve_fundamental_312(tup)
    assert max(gs.residuals) <= 1e-10
    assert verify_lemma_identities_312(tup, gs, 1e-10).passed
    assert check_dilation_hypotheses_312(gs).passed


def test_diagonal_and_lstsq_agree():
    for seed in range(5):
        tup = diagonal_model("gamma333", 3, seed, rotate=True)
        a = solve_fundamental_333(tup, method="diagonal")
        b = solve_fundamental_333(tup, method="lstsq")
        for Fa, Fb in zip(a.F, b.F):
            assert op_norm(Fa - Fb) <= 1e-9 * max(1.0, op_norm(Fa))


def test_inconsistent_status():
    # T1 with a component outside the defect range of T7 cannot be written as D F D
    T = [np.zeros((2, 2), dtype=complex) for _ in range(7)]
    T[6] = np.diag([1.0, 0.0])
    T[0] = np.diag([0.5, 0.0])
    fs = solve_fundamental_333(OperatorTuple("gamma333", T))
    assert fs.status == INCONSISTENT
    rep = check_gamma333(OperatorTuple("gamma333", T))
    assert not rep.passed


def test_hypotheses_noncommuting_pair_exact_norm():
    F = [np.zeros((2, 2), dtype=complex) for _ in range(6)]
    F[0] = np.array([[0, 1], [0, 0]])
    F[1] = np.array([[0, 0], [1, 0]])
    rep = hypotheses_333(F)
    assert rep.item("(i) [F1,F2] = 0").value == pytest.approx(1.0)
    assert not rep.passed


def test_hypotheses_312_broken_ii():
    G1 = np.array([[0, 1], [0, 0]], dtype=complex)
    Z = np.zeros((2, 2))
    rep = hypotheses_312(G1, Z, Z, Z)
    assert rep.item("(ii) [G1,G1^H] = [Gt2,Gt2^H]").value == pytest.approx(1.0)


def test_adjoint_symmetry_of_pairs():
    # swapping T_i and T_{7-i} swaps F_i and F_{7-i}
    tup = diagonal_model("gamma333", 3, 4, rotate=True)
    T = tup.operators
    swapped = OperatorTuple("gamma333", [T[5 - i] for i in range(6)] + [T[6]])
    a, b = solve_fundamental_333(tup), solve_fundamental_333(swapped)
    for i in range(6):
        assert op_norm(a.F[i] - b.F[5 - i]) < 1e-10


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 4))
def test_numerical_radius_bound_on_fundamental_pencils(seed, dim):
    tup = diagonal_model("gamma333", dim, seed, rotate=True)
    fs = solve_fundamental_333(tup)
    for z in np.exp(1j * np.linspace(0, 2 * np.pi, 9)):
        for i in range(6):
            assert numerical_radius(fs.F[i] + z * fs.F[5 - i]) <= 1 + 1e-8

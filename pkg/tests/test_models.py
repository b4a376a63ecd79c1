import numpy as np
import pytest

from gamma_dilation.checks import check_gamma333, check_isometry312, check_isometry333
from gamma_dilation.errors import InputError, StructureError
from gamma_dilation.generators import f_family_333, g_family_312
from gamma_dilation.linalg import adj, commutator_report, haar_unitary, op_norm
from gamma_dilation.models import (ThetaNotInnerError, blh_intertwine_check,
                                   build_pure_isometry_model_312, build_pure_isometry_model_333,
                                   compress_model, recover_coefficients)


def test_scalar_model_is_bidiagonal():
    F = f_family_333(1, 4)
    m = build_pure_isometry_model_333(F, depth=5)
    M1 = m.assembled[0]
    assert np.allclose(np.diag(M1), F[0][0, 0])
    assert np.allclose(np.diag(M1, -1), np.conj(F[5][0, 0]))
    assert np.allclose(np.triu(M1, 1), 0) and np.allclose(np.tril(M1, -2), 0)


def test_zero_model():
    Z = [np.zeros((2, 2))] * 6
    m = build_pure_isometry_model_333(Z, depth=4)
    assert all(op_norm(M) == 0 for M in m.assembled[:6])
    assert m.status == "verified"
    assert all(op_norm(C) == 0 for C in recover_coefficients(m))


def test_round_trip_and_isometry_e2():
    F = f_family_333(2, 8)
    m = build_pure_isometry_model_333(F, depth=6)
    assert m.status == "verified"
    rec, leak = recover_coefficients(m, return_leakage=True)
    assert max(op_norm(a - b) for a, b in zip(rec, F)) <= 1e-14
    assert max(leak) <= 1e-12
    assert check_isometry333(m.as_tuple(), tol=1e-9, interior=m.interior_dim).passed
    G = g_family_312(2, 8)
    m = build_pure_isometry_model_312(*G, depth=6)
    rec = recover_coefficients(m)
    exp = [G[0], 2 * G[1], 2 * G[2], G[3]]
    assert max(op_norm(a - b) for a, b in zip(rec, exp)) <= 1e-14
    assert check_isometry312(m.as_tuple(), tol=1e-9, interior=m.interior_dim).passed


def test_recovery_detects_leakage():
    m = build_pure_isometry_model_333(f_family_333(2, 1), depth=4)
    m.assembled[0] = m.assembled[0] + 0.1 * np.eye(m.assembled[0].shape[0], k=1)
    with pytest.raises(StructureError):
        recover_coefficients(m)


def test_noncommuting_family_is_unverified():
    F = [np.zeros((2, 2), dtype=complex) for _ in range(6)]
    F[0] = 0.3 * np.array([[0, 1], [0, 0]])
    F[1] = 0.3 * np.array([[0, 0], [1, 0]])
    m = build_pure_isometry_model_333(F, depth=4)
    assert m.status == "unverified model"


def test_depth_too_small():
    with pytest.raises(InputError):
        build_pure_isometry_model_333(f_family_333(1, 0), depth=1)


def test_blh_shift_theta_reproduces_symbols():
    F = f_family_333(2, 3)
    m = build_pure_isometry_model_333(F, depth=6)
    res = blh_intertwine_check(m, [np.zeros((2, 2)), np.eye(2)])
    assert res.report.passed
    for i in range(6):
        assert op_norm(res.psi[i].constant - F[i]) == 0
        assert op_norm(res.psi[i].linear - adj(F[5 - i])) == 0


def test_blh_constant_unitary_conjugates(rng):
    F = f_family_333(2, 3)
    m = build_pure_isometry_model_333(F, depth=6)
    U = haar_unitary(2, rng)
    res = blh_intertwine_check(m, [U])
    assert res.report.passed
    for i in range(6):
        assert op_norm(res.psi[i].constant - adj(U) @ F[i] @ U) <= 1e-12
        assert op_norm(res.psi[i].linear - adj(U) @ adj(F[5 - i]) @ U) <= 1e-12


def test_blh_diagonal_degree_two():
    F = f_family_333(2, 5, rotate=False)
    m = build_pure_isometry_model_333(F, depth=8)
    res = blh_intertwine_check(m, [np.diag([0.0, 1.0]), np.zeros((2, 2)), np.diag([1.0, 0.0])])
    analytic = [it for it in res.report.items if "analytic" in it.name]
    assert max(it.value for it in analytic) <= 1e-10
    assert res.report.passed
    for p in res.psi:
        assert op_norm(p.constant - np.diag(np.diag(p.constant))) <= 1e-12


def test_blh_rejects_non_inner():
    m = build_pure_isometry_model_333(f_family_333(2, 5), depth=6)
    with pytest.raises(ThetaNotInnerError) as exc:
        blh_intertwine_check(m, [0.5 * np.eye(2)])
    assert exc.value.residual == pytest.approx(0.75)


def test_compress_model():
    F = f_family_333(2, 6)
    m = build_pure_isometry_model_333(F, depth=6)
    t1 = compress_model(m, 1)
    for i in range(6):
        assert np.array_equal(t1[i], F[i])
    assert op_norm(t1[6]) == 0
    t = compress_model(m, 5)
    assert commutator_report(t.operators, tol=1e-10).passed
    scalar = build_pure_isometry_model_333(f_family_333(1, 6), depth=6)
    t3 = compress_model(scalar, 3)
    assert t3.dim == 3 and check_gamma333(t3).passed
    with pytest.raises(InputError):
        compress_model(m, 6)

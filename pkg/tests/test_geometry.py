import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import crandn
from gamma_dilation.errors import InputError
from gamma_dilation.geometry import (SPACE_312, SPACE_333, MuSpace, coords312, coords333, in_K,
                                     in_K1, mu, mu_lower_bound, sample_distinguished, sample_gamma)


def test_mu_examples():
    assert mu(np.diag([0.5, 0.25, 0.8]), SPACE_333).value == pytest.approx(0.8, rel=0.02)
    assert mu(np.zeros((3, 3)), SPACE_333).value == 0.0
    assert mu(np.eye(3), SPACE_333).value == pytest.approx(1.0, rel=0.02)


def test_mu_witness_is_singular(rng):
    for _ in range(5):
        A = crandn(rng, 3, 3)
        for sp in (SPACE_333, SPACE_312):
            r = mu(A, sp)
            assert r.singularity_residual(A, sp) < 1e-8


def test_mu_matches_phase_lower_bound(rng):
    # for complex scalar blocks mu equals max over block phases of r(QA)
    for _ in range(10):
        A = crandn(rng, 3, 3)
        for sp in (SPACE_333, SPACE_312):
            lb = mu_lower_bound(A, sp, n_angles=96)
            assert mu(A, sp).value >= lb * (1 - 1e-6)
            assert mu(A, sp).value <= lb * 1.02


def test_mu_full_block_is_spectral_radius(rng):
    A = crandn(rng, 3, 3)
    r = max(abs(np.linalg.eigvals(A)))
    assert mu(A, MuSpace((3,))).value == pytest.approx(r, rel=1e-8)


def test_space_parse():
    assert MuSpace.parse("3,1,1,1") == SPACE_333
    assert MuSpace.parse("3,1,2") == SPACE_312
    with pytest.raises(InputError):
        MuSpace.parse("3,1,1")


def test_coords_examples():
    assert np.allclose(coords333(np.zeros((3, 3))), 0)
    assert np.allclose(coords333(np.eye(3)), 1)
    a = np.array([0.3, -0.2j, 0.7 + 0.1j])
    exp = [a[0], a[1], a[0] * a[1], a[2], a[0] * a[2], a[1] * a[2], a.prod()]
    assert np.allclose(coords333(np.diag(a)), exp, atol=1e-15)
    assert np.allclose(coords312(np.zeros((3, 3))), 0)
    assert np.allclose(coords312(np.eye(3)), [1, 2, 1, 2, 1])
    exp = [a[0], a[0] * a[1] + a[0] * a[2], a.prod(), a[1] + a[2], a[1] * a[2]]
    assert np.allclose(coords312(np.diag(a)), exp, atol=1e-15)


def test_coords_exact_on_integers():
    A = np.array([[1, 2, 0], [3, -1, 4], [0, 5, 2]], dtype=complex)
    # minors and determinant expanded by hand
    assert np.allclose(coords333(A), [1, -1, -7, 2, 2, -22, -34], rtol=0, atol=1e-13)
    assert np.allclose(coords312(A), [1, -5, -34, 1, -22], rtol=0, atol=1e-13)


def test_in_K_examples():
    assert in_K(np.ones(7)).passed
    assert not in_K(np.zeros(7)).passed
    t = np.exp(1j * np.array([0.3, -1.1, 2.0]))
    assert in_K(coords333(np.diag(t))).passed
    assert in_K1(np.array([1, 2, 1, 2, 1])).passed
    assert not in_K1(np.zeros(5)).passed
    assert in_K1(coords312(np.diag(t))).passed


def test_sample_gamma_examples():
    pts = sample_gamma(SPACE_333, 3, seed=4)
    assert len(pts) == 3
    for p in pts:
        assert mu(p.A, SPACE_333).value <= (1 / 1.05) * 1.02
    one = sample_gamma(SPACE_333, 1, 0, boundary=True, matrices=[np.eye(3)])[0]
    assert np.allclose(one.point, 1) and one.mu == pytest.approx(1.0)
    with pytest.raises(InputError):
        sample_gamma(SPACE_333, 0, 0)


def test_sample_gamma_deterministic():
    a = sample_gamma(SPACE_312, 2, seed=9)
    b = sample_gamma(SPACE_312, 2, seed=9)
    assert all(np.array_equal(p.point, q.point) for p, q in zip(a, b))


def test_boundary_unimodular_diagonal_samples_in_K():
    rng = np.random.default_rng(3)
    mats = [np.diag(np.exp(2j * np.pi * rng.random(3))) for _ in range(5)]
    for sp, check in ((SPACE_333, in_K), (SPACE_312, in_K1)):
        for p in sample_gamma(sp, 5, 0, boundary=True, matrices=mats):
            assert check(p.point).passed


def test_distinguished_samples_in_K():
    for p in sample_distinguished(SPACE_333, 5, 1):
        assert in_K(p).passed
    for p in sample_distinguished(SPACE_312, 5, 1):
        assert in_K1(p).passed


@settings(max_examples=25, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
                min_size=3, max_size=3))
def test_mu_diagonal_oracle(a):
    A = np.diag(a)
    m = max(abs(x) for x in a)
    for sp in (SPACE_333, SPACE_312):
        assert abs(mu(A, sp).value - m) <= 0.02 * m + 1e-12


@pytest.mark.parametrize("space", [SPACE_333, SPACE_312])
@pytest.mark.parametrize("a", [[0, 0, 0.0625], [0, 2e-3j, 0], [1e-6, 0, 0], [1e-30, 0, 0]])
def test_mu_small_diagonal_beyond_unit_scale(space, a):
    # singular points sit at |z| = 1/max|a_ii|, far outside the unit polydisc
    m = max(abs(x) for x in a)
    assert mu(np.diag(a).astype(complex), space).value == pytest.approx(m, rel=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.2, 5.0))
def test_mu_homogeneity(seed, t):
    A = crandn(np.random.default_rng(seed), 3, 3)
    for sp in (SPACE_333, SPACE_312):
        assert mu(t * A, sp).value == pytest.approx(t * mu(A, sp).value, rel=0.04)

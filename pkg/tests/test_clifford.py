"""Generator spaces, the bullet product, and Gram resolutions."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cliffdyn.clifford import (
    allocate,
    allocate_blocks,
    bullet,
    hermitian_eig,
    hermitian_from_json,
    hermitian_to_json,
    resolve_hermitian,
    resolve_pair,
    standard_basis,
    validate_hermitian,
)
from cliffdyn.errors import InputError, PreconditionError
from cliffdyn.sampling import random_hermitian


def test_allocate_generator_norms():
    space = allocate(2, 2)
    g = [space.generator(k) for k in range(4)]
    assert bullet(g[0], g[0]) == 2.0
    assert bullet(g[1], g[1]) == 2.0
    assert bullet(g[2], g[2]) == -2.0
    assert bullet(g[0], g[2]) == 0.0
    assert bullet(g[0], g[1]) == 0.0


def test_allocate_rejects_empty():
    with pytest.raises(InputError):
        allocate(0, 0)


def test_generator_index_out_of_range():
    space = allocate(1, 0)
    with pytest.raises(IndexError):
        space.generator(1)


def test_blocks_are_disjoint():
    space = allocate_blocks([("a", 1, 1), ("b", 2, 0)])
    sa = space.block_slice("a")
    sb = space.block_slice("b")
    assert sa == slice(0, 2)
    assert sb == slice(2, 4)
    assert space.block_signature("b") == (2, 0)
    # cross-block products vanish
    va = space.generator(0)
    vb = space.generator(2)
    assert bullet(va, vb) == 0.0


def test_space_mismatch_raises():
    a = allocate(1, 1)
    b = allocate(1, 1)
    with pytest.raises(PreconditionError):
        bullet(a.generator(0), b.generator(0))


def test_vector_requires_matching_length():
    space = allocate(2, 1)
    with pytest.raises(InputError):
        space.vector([1.0, 2.0])


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_bullet_symmetric_and_bilinear(seed):
    rng = np.random.default_rng(seed)
    space = allocate(3, 2)
    u = space.vector(rng.normal(size=5) + 1j * rng.normal(size=5))
    v = space.vector(rng.normal(size=5) + 1j * rng.normal(size=5))
    w = space.vector(rng.normal(size=5) + 1j * rng.normal(size=5))
    alpha = complex(rng.normal(), rng.normal())
    assert bullet(u, v) == pytest.approx(bullet(v, u), abs=1e-12)
    lhs = bullet(alpha * u + v, w)
    rhs = alpha * bullet(u, w) + bullet(v, w)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


def test_conj_involution_and_product_conjugation():
    rng = np.random.default_rng(7)
    space = allocate(2, 3)
    u = space.vector(rng.normal(size=5) + 1j * rng.normal(size=5))
    v = space.vector(rng.normal(size=5) + 1j * rng.normal(size=5))
    assert np.array_equal(u.conj().conj().coeffs, u.coeffs)
    assert bullet(u.conj(), v.conj()) == pytest.approx(
        np.conj(bullet(u, v)), rel=1e-12, abs=1e-12)


def test_standard_basis_product_table():
    space = allocate(4, 4)
    E, F = standard_basis(space)
    assert len(E) == 2 and len(F) == 2
    for i in range(2):
        for j in range(2):
            d = 1.0 if i == j else 0.0
            assert bullet(E[i], E[j].conj()) == pytest.approx(-d, abs=1e-14)
            assert bullet(F[i], F[j].conj()) == pytest.approx(+d, abs=1e-14)
            assert bullet(E[i], E[j]) == pytest.approx(0.0, abs=1e-14)
            assert bullet(F[i], F[j]) == pytest.approx(0.0, abs=1e-14)
            assert bullet(E[i], F[j]) == pytest.approx(0.0, abs=1e-14)
            assert bullet(E[i], F[j].conj()) == pytest.approx(0.0, abs=1e-14)
    # the null combination advertised for zero eigenvalues
    null = E[0] + F[0]
    assert bullet(null, null.conj()) == pytest.approx(0.0, abs=1e-14)


def test_standard_basis_requires_matched_even_signature():
    with pytest.raises(PreconditionError):
        standard_basis(allocate(3, 3))
    with pytest.raises(PreconditionError):
        standard_basis(allocate(4, 2))


def test_hermitian_eig_diagonal_and_pauli():
    U, lam = hermitian_eig(np.diag([3.0, -1.0]))
    assert np.allclose(lam, [3.0, -1.0])
    assert np.allclose(np.abs(U), np.eye(2))
    U, lam = hermitian_eig(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert np.allclose(lam, [1.0, -1.0])


def test_hermitian_eig_random_reconstruction():
    rng = np.random.default_rng(11)
    for _ in range(10):
        H = random_hermitian(rng, 5)
        U, lam = hermitian_eig(H)
        recon = (U * lam) @ U.conj().T
        assert np.abs(recon - H).max() < 1e-11
        assert np.abs(U.conj().T @ U - np.eye(5)).max() < 1e-11
        # independent oracle: same spectrum as numpy's eigensolver
        ref = np.sort(np.linalg.eigvalsh(H))
        assert np.allclose(np.sort(lam), ref, atol=1e-11)
        # descending order
        assert np.all(np.diff(lam) <= 1e-15)


def test_hermitian_eig_rejects_non_hermitian():
    with pytest.raises(InputError):
        hermitian_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_resolve_diag_plus_minus():
    space = allocate(4, 4)
    res = resolve_hermitian(np.diag([1.0, -1.0]), space)
    E, F = standard_basis(space)
    # c_1 = F_1 and c_2 = E_2 exactly (descending eigenvalue order)
    assert np.allclose(res.vectors[0].coeffs, F[0].coeffs)
    assert np.allclose(res.vectors[1].coeffs, E[1].coeffs)
    assert res.gram_residual() < 1e-14
    assert res.null_residual() < 1e-14


def test_resolve_zero_matrix_unit_null_vector():
    space = allocate(2, 2)
    res = resolve_hermitian(np.zeros((1, 1)), space)
    E, F = standard_basis(space)
    assert np.allclose(res.vectors[0].coeffs, (E[0] + F[0]).coeffs)
    assert bullet(res.vectors[0], res.vectors[0].conj()) == pytest.approx(0.0, abs=1e-14)


def test_resolve_random_mixed_signature():
    rng = np.random.default_rng(23)
    H = random_hermitian(rng, 4, n_zero=1)
    space = allocate(8, 8)
    res = resolve_hermitian(H, space)
    assert res.gram_residual() < 1e-10
    assert res.null_residual() < 1e-12
    res.verify()


def test_resolve_property_suite_small():
    # desk-size slice of acceptance criterion 1
    rng = np.random.default_rng(5)
    for _ in range(25):
        n = int(rng.integers(1, 9))
        n_zero = int(rng.integers(0, n + 1)) if rng.random() < 0.4 else 0
        H = random_hermitian(rng, n, n_zero=n_zero)
        space = allocate(2 * n, 2 * n)
        res = resolve_hermitian(H, space)
        assert res.gram_residual() < 1e-10
        assert res.null_residual() < 1e-12


def test_resolve_insufficient_space():
    with pytest.raises(PreconditionError):
        resolve_hermitian(np.eye(3), allocate(4, 4))


def _pair_grams(c, dstar):
    x = np.array([[bullet(c[a], c[b].conj()) for b in range(2)] for a in range(2)])
    p = np.array([[bullet(dstar[a], dstar[b].conj()) for b in range(2)] for a in range(2)])
    m = np.array([[bullet(c[a], dstar[b]) for b in range(2)] for a in range(2)])
    return x, p, m


def test_resolve_pair_disjoint_blocks_m_zero():
    x = np.diag([2.0, 1.0])
    p = np.diag([1.0, 0.5])
    c, dstar, _ = resolve_pair(x, p, np.zeros((2, 2)))
    gx, gp, gm = _pair_grams(c, dstar)
    assert np.abs(gx - x).max() < 1e-12
    assert np.abs(gp - p).max() < 1e-12
    assert np.abs(gm).max() < 1e-13


def test_resolve_pair_noether_constrained():
    mu = 1.0
    x = np.eye(2)
    p = np.eye(2)
    c, dstar, _ = resolve_pair(x, p, mu * np.eye(2))
    _, _, gm = _pair_grams(c, dstar)
    assert np.abs(gm - mu * np.eye(2)).max() < 1e-13


def test_resolve_pair_random_all_blocks():
    rng = np.random.default_rng(31)
    for _ in range(5):
        x = random_hermitian(rng, 2)
        p = random_hermitian(rng, 2)
        M = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        c, dstar, _ = resolve_pair(x, p, M)
        gx, gp, gm = _pair_grams(c, dstar)
        assert np.abs(gx - x).max() < 1e-10
        assert np.abs(gp - p).max() < 1e-10
        assert np.abs(gm - M).max() < 1e-10
        # same-kind products stay null
        for a in range(2):
            for b in range(2):
                assert abs(bullet(c[a], c[b])) < 1e-12
                assert abs(bullet(dstar[a], dstar[b])) < 1e-12


def test_resolve_pair_requires_h_block():
    space = allocate_blocks([("c", 4, 4), ("d", 4, 4)])
    with pytest.raises(PreconditionError):
        resolve_pair(np.eye(2), np.eye(2), np.zeros((2, 2)), space)


def test_hermitian_json_roundtrip():
    rng = np.random.default_rng(3)
    H = random_hermitian(rng, 3)
    H2 = hermitian_from_json(hermitian_to_json(H))
    assert np.abs(H - H2).max() < 1e-15
    with pytest.raises(InputError):
        hermitian_from_json({"n": 2, "re": [[0, 1], [1, 0]], "im": [[0, 1], [1, 0]]})


def test_validate_hermitian_symmetrizes():
    H = np.array([[1.0, 1e-16j], [0.0, 2.0]])
    out = validate_hermitian(H)
    assert np.abs(out - out.conj().T).max() == 0.0

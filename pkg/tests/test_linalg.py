"""Operator-calculus tests; derived expectations are frozen from independent
oracles (quadratic formula, SVD by hand, rank counts)."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from povmnorms import linalg
from povmnorms.errors import DomainError

RNG = np.random.default_rng(20240811)


def random_hermitian(d, rng=RNG):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (a + a.conj().T) / 2


def random_psd(d, rng=RNG):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return a @ a.conj().T


# ---- psd_check / loewner ----------------------------------------------------


def test_psd_check_identity():
    assert linalg.psd_check(np.eye(3), 1e-10)


def test_psd_check_indefinite_diagonal():
    assert not linalg.psd_check(np.diag([1.0, -1.0]), 1e-10)


def test_psd_check_derived_quadratic_formula():
    # eigenvalues of [[2,1],[1,1]] are (3 +- sqrt(5))/2, both positive
    a = np.array([[2.0, 1.0], [1.0, 1.0]])
    lam_min = (3 - np.sqrt(5)) / 2
    assert lam_min > 0
    assert linalg.psd_check(a, 1e-10)


def test_psd_check_rejects_non_hermitian():
    with pytest.raises(DomainError):
        linalg.psd_check(np.array([[0.0, 1.0], [0.0, 0.0]]), 1e-10)


def test_loewner_reflexive_and_scalar():
    eye = np.eye(2)
    assert linalg.loewner_geq(eye, eye)
    assert linalg.loewner_geq(2 * eye, eye)
    assert not linalg.loewner_geq(np.diag([1.0, 0.0]), np.diag([0.0, 1.0]))


def test_loewner_dim_mismatch():
    with pytest.raises(DomainError):
        linalg.loewner_geq(np.eye(2), np.eye(3))


def test_loewner_partial_order_on_constructed_chain():
    # reflexive, antisymmetric within tol, transitive on A >= B >= C chains
    rng = np.random.default_rng(5)
    for _ in range(25):
        c = random_psd(3, rng)
        p1 = random_psd(3, rng)
        p2 = random_psd(3, rng)
        b = c + p2
        a = b + p1
        assert linalg.loewner_geq(a, b) and linalg.loewner_geq(b, c)
        assert linalg.loewner_geq(a, c)
        if linalg.loewner_geq(b, a) and linalg.loewner_geq(a, b):
            assert np.allclose(a, b, atol=1e-7)


# ---- spectral functions ------------------------------------------------------


def test_spectral_decomposition_reconstructs():
    a = random_hermitian(5)
    dec = linalg.spectral_decomposition(a)
    err = np.linalg.norm(dec.reconstruct() - a)
    assert err <= 1e-10 * max(np.linalg.norm(a), 1.0)
    assert np.all(np.diff(dec.eigenvalues) >= -1e-12)


def test_matrix_power_identity_and_diagonal():
    np.testing.assert_allclose(linalg.matrix_power(np.eye(2), 0.5), np.eye(2), atol=1e-12)
    np.testing.assert_allclose(
        linalg.matrix_power(np.diag([4.0, 9.0]), 0.5), np.diag([2.0, 3.0]), atol=1e-12
    )


def test_matrix_power_null_eigenvalue_convention():
    out = linalg.matrix_power(np.diag([2.0, 0.0]), 0.5)
    np.testing.assert_allclose(out, np.diag([np.sqrt(2.0), 0.0]), atol=1e-12)


def test_matrix_power_rejects_indefinite():
    with pytest.raises(DomainError):
        linalg.matrix_power(np.diag([1.0, -1.0]), 0.5)


def test_matrix_power_semigroup():
    rng = np.random.default_rng(7)
    for _ in range(20):
        a = random_psd(3, rng)
        s, t = rng.uniform(0.2, 2.0, size=2)
        lhs = linalg.matrix_power(a, s + t)
        rhs = linalg.matrix_power(a, s) @ linalg.matrix_power(a, t)
        assert np.linalg.norm(lhs - rhs) <= 1e-8 * max(np.linalg.norm(lhs), 1.0)


def test_schatten_norm_trivial_cases():
    assert linalg.schatten_norm(np.eye(2), 1) == pytest.approx(2.0)
    assert linalg.schatten_norm(np.diag([3.0, -4.0]), 2) == pytest.approx(5.0)


def test_schatten_norm_derived_svd_oracle():
    # singular values of [[0,1],[0,0]] are {1, 0}
    a = np.array([[0.0, 1.0], [0.0, 0.0]])
    sv = np.linalg.svd(a, compute_uv=False)
    np.testing.assert_allclose(sorted(sv), [0.0, 1.0], atol=1e-12)
    assert linalg.schatten_norm(a, 1) == pytest.approx(1.0)


def test_schatten_norm_rejects_small_p():
    with pytest.raises(DomainError):
        linalg.schatten_norm(np.eye(2), 0.5)


def test_schatten_monotone_in_p():
    rng = np.random.default_rng(11)
    ps = [1.0, 1.5, 2.0, 3.0, 6.0, np.inf]
    for _ in range(200):
        a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        vals = [linalg.schatten_norm(a, p) for p in ps]
        assert all(x >= y - 1e-10 for x, y in zip(vals, vals[1:]))


# ---- polar / hermitian parts --------------------------------------------------


def test_polar_parts_identity():
    abs_a, abs_astar, u = linalg.polar_parts(np.eye(2))
    np.testing.assert_allclose(abs_a, np.eye(2), atol=1e-12)
    np.testing.assert_allclose(abs_astar, np.eye(2), atol=1e-12)
    np.testing.assert_allclose(u, np.eye(2), atol=1e-12)


def test_polar_parts_diagonal():
    abs_a, _, u = linalg.polar_parts(np.diag([-2.0, 3.0]))
    np.testing.assert_allclose(abs_a, np.diag([2.0, 3.0]), atol=1e-12)
    np.testing.assert_allclose(u, np.diag([-1.0, 1.0]), atol=1e-12)


def test_polar_parts_nilpotent_derived():
    a = np.array([[0.0, 1.0], [0.0, 0.0]])
    abs_a, abs_astar, u = linalg.polar_parts(a)
    np.testing.assert_allclose(abs_a, np.diag([0.0, 1.0]), atol=1e-12)
    np.testing.assert_allclose(abs_astar, np.diag([1.0, 0.0]), atol=1e-12)
    # u*u is the projection onto range(|a|)
    np.testing.assert_allclose(u.conj().T @ u, np.diag([0.0, 1.0]), atol=1e-12)


def test_polar_reconstruction_property():
    rng = np.random.default_rng(13)
    for _ in range(50):
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        abs_a, _, u = linalg.polar_parts(a)
        err = np.linalg.norm(u @ abs_a - a)
        assert err <= 1e-9 * (1.0 + np.linalg.norm(a))


def test_hermitian_parts_nilpotent_derived():
    a = np.array([[0.0, 1.0], [0.0, 0.0]])
    re, im = linalg.hermitian_parts(a)
    np.testing.assert_allclose(re, np.array([[0.0, 0.5], [0.5, 0.0]]), atol=1e-12)
    np.testing.assert_allclose(im, np.array([[0.0, -0.5j], [0.5j, 0.0]]), atol=1e-12)
    np.testing.assert_allclose(re + 1j * im, a, atol=1e-12)


def test_hermitian_parts_identity():
    re, im = linalg.hermitian_parts(np.eye(2))
    np.testing.assert_allclose(re, np.eye(2), atol=1e-12)
    np.testing.assert_allclose(im, np.zeros((2, 2)), atol=1e-12)


def test_pos_neg_parts_diagonal():
    pos, neg = linalg.pos_neg_parts(np.diag([1.0, -1.0]))
    np.testing.assert_allclose(pos, np.diag([1.0, 0.0]), atol=1e-12)
    np.testing.assert_allclose(neg, np.diag([0.0, 1.0]), atol=1e-12)


def test_pos_neg_parts_properties():
    rng = np.random.default_rng(17)
    for _ in range(50):
        h = random_hermitian(4, rng)
        pos, neg = linalg.pos_neg_parts(h)
        assert linalg.psd_check(pos) and linalg.psd_check(neg)
        assert np.linalg.norm(pos @ neg) <= 1e-9 * (1 + np.linalg.norm(h)) ** 2
        assert np.max(np.abs(pos - neg - h)) <= 1e-10 * (1 + np.linalg.norm(h))


def test_pos_neg_rejects_non_hermitian():
    with pytest.raises(DomainError):
        linalg.pos_neg_parts(np.array([[0.0, 1.0], [0.0, 0.0]]))


# ---- kron ---------------------------------------------------------------------


def test_kron_identity_and_diagonal():
    np.testing.assert_allclose(linalg.kron(np.eye(2), np.eye(2)), np.eye(4), atol=1e-15)
    np.testing.assert_allclose(
        linalg.kron(np.diag([1.0, 2.0]), np.diag([3.0, 4.0])), np.diag([3.0, 4.0, 6.0, 8.0]), atol=1e-15
    )


def test_kron_rank_multiplicative_derived():
    rng = np.random.default_rng(19)
    a = rng.normal(size=(2, 2))
    b = np.outer(rng.normal(size=2), rng.normal(size=2))  # rank 1
    ra = np.linalg.matrix_rank(a)
    rb = np.linalg.matrix_rank(b)
    assert np.linalg.matrix_rank(linalg.kron(a, b)) == ra * rb


def test_kron_of_psd_is_psd():
    rng = np.random.default_rng(23)
    a, b = random_psd(2, rng), random_psd(3, rng)
    assert linalg.psd_check(linalg.kron(a, b))


# ---- hypothesis property: power/schatten interplay ----------------------------


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=1, max_value=4), st.floats(min_value=1.0, max_value=5.0))
def test_schatten_of_psd_equals_trace_power(d, p):
    rng = np.random.default_rng(d * 1000 + int(p * 10))
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    psd = a @ a.conj().T
    direct = linalg.schatten_norm(psd, p)
    via_power = np.trace(linalg.matrix_power(psd, p)).real ** (1.0 / p)
    assert direct == pytest.approx(via_power, rel=1e-8, abs=1e-10)

"""QRV algebra, pairing and integration tests."""

import numpy as np
import pytest

from povmnorms.povm import density, maximally_mixed, povm, scalar_povm, space
from povmnorms.qrv import (QRV, commutes, constant_qrv, context, integrate,
                           integrate_ctx, pairing, qrv)
from povmnorms.errors import DomainError


def _rand_qrv(rng, sp, dim):
    vals = rng.normal(size=(len(sp), dim, dim)) + 1j * rng.normal(size=(len(sp), dim, dim))
    return QRV(sp, vals, dim)


def _rand_povm(rng, sp, dim):
    effects = []
    for _ in range(len(sp)):
        a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        effects.append(a @ a.conj().T)
    scale = np.linalg.norm(sum(effects), 2)
    return povm(sp, [e / scale for e in effects])


def _rand_state(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    m = a @ a.conj().T + 0.05 * np.eye(dim)
    return density(m / np.trace(m).real)


def test_adjoint_involution_and_re_im():
    rng = np.random.default_rng(1)
    sp = space("a", "b")
    f = _rand_qrv(rng, sp, 3)
    np.testing.assert_allclose(f.adjoint().adjoint().values, f.values, atol=1e-14)
    recombined = f.re().values + 1j * f.im().values
    np.testing.assert_allclose(recombined, f.values, atol=1e-13)
    assert f.re().is_hermitian() and f.im().is_hermitian()


def test_abs_of_nilpotent_matches_svd_oracle():
    sp = space("a")
    f = qrv(sp, [np.array([[0.0, 1.0], [0.0, 0.0]])])
    np.testing.assert_allclose(f.abs().value("a"), np.diag([0.0, 1.0]), atol=1e-12)
    np.testing.assert_allclose(f.abs_star().value("a"), np.diag([1.0, 0.0]), atol=1e-12)


def test_pointwise_power_requires_psd():
    sp = space("a")
    f = qrv(sp, [np.diag([1.0, -1.0])])
    with pytest.raises(DomainError):
        f.pointwise_power(0.5)
    g = qrv(sp, [np.diag([4.0, 9.0])])
    np.testing.assert_allclose(g.pointwise_power(0.5).value("a"), np.diag([2.0, 3.0]), atol=1e-12)


def test_commutes_detects_structure():
    sp = space("a")
    f = qrv(sp, [np.diag([1.0, 2.0])])
    g = qrv(sp, [np.diag([3.0, 4.0])])
    h = qrv(sp, [np.array([[0.0, 1.0], [1.0, 0.0]])])
    assert commutes(f, g)
    assert not commutes(f, h)


def test_pairing_constant_identity():
    sp = space("a", "b")
    nu = scalar_povm(sp, [1.0, 2.0], dim=2)
    ctx = context(nu)
    f = constant_qrv(sp, np.eye(2))
    rng = np.random.default_rng(3)
    s = _rand_state(rng, 2)
    vals = pairing(f, s, ctx)
    np.testing.assert_allclose(vals, [1.0, 1.0], atol=1e-12)


def test_pairing_trace_arithmetic():
    # f(a) = diag(2,0), D = I, s = I/2  ->  f_s(a) = 1
    sp = space("a")
    nu = scalar_povm(sp, [1.0], dim=2)
    ctx = context(nu)
    f = qrv(sp, [np.diag([2.0, 0.0])])
    vals = pairing(f, maximally_mixed(2), ctx)
    assert vals[0] == pytest.approx(1.0)


def test_pairing_null_atom_is_zero():
    sp = space("a", "b")
    nu = povm(sp, [np.zeros((2, 2)), np.eye(2)])
    ctx = context(nu)
    f = constant_qrv(sp, np.array([[5.0, 1.0], [1.0, 5.0]]))
    vals = pairing(f, maximally_mixed(2), ctx)
    assert vals[0] == pytest.approx(0.0)


def test_integrate_indicator_reproduces_measure():
    rng = np.random.default_rng(5)
    sp = space("a", "b", "c")
    nu = _rand_povm(rng, sp, 3)
    f = constant_qrv(sp, np.eye(3))
    np.testing.assert_allclose(integrate(f, nu), nu.total(), atol=1e-10)


def test_integrate_single_atom_derived():
    # nu({a}) = diag(1,0), rho = I/2, f = [[1,1],[1,1]]: D = diag(2,0),
    # weight 1/2, so the integral is diag(1,0) by direct arithmetic.
    sp = space("a")
    nu = povm(sp, [np.diag([1.0, 0.0])])
    f = qrv(sp, [np.ones((2, 2))])
    out = integrate(f, nu, maximally_mixed(2))
    np.testing.assert_allclose(out, np.diag([1.0, 0.0]), atol=1e-12)


def test_integrate_scalar_measure_is_entrywise():
    rng = np.random.default_rng(7)
    sp = space("a", "b")
    weights = [0.7, 1.3]
    nu = scalar_povm(sp, weights, dim=2)
    f = _rand_qrv(rng, sp, 2)
    expected = weights[0] * f.value("a") + weights[1] * f.value("b")
    np.testing.assert_allclose(integrate(f, nu), expected, atol=1e-10)


def test_implicit_definition_consistency():
    rng = np.random.default_rng(11)
    sp = space("a", "b", "c")
    for _ in range(100):
        dim = int(rng.integers(1, 4))
        nu = _rand_povm(rng, sp, dim)
        rho = _rand_state(rng, dim)
        s = _rand_state(rng, dim)
        f = _rand_qrv(rng, sp, dim)
        ctx = context(nu, rho)
        lhs = np.trace(s.matrix @ integrate_ctx(f, ctx))
        f_s = pairing(f, s, ctx)
        rhs = np.sum(np.asarray(f_s) * ctx.weights)
        assert abs(lhs - rhs) <= 1e-9 * (1 + abs(lhs))


def test_integrate_positivity():
    rng = np.random.default_rng(13)
    sp = space("a", "b")
    for _ in range(50):
        dim = int(rng.integers(1, 4))
        nu = _rand_povm(rng, sp, dim)
        vals = []
        for _ in range(len(sp)):
            a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
            vals.append(a @ a.conj().T)
        f = qrv(sp, vals)
        out = integrate(f, nu)
        assert np.linalg.eigvalsh((out + out.conj().T) / 2)[0] >= -1e-10


def test_integrate_linearity():
    rng = np.random.default_rng(17)
    sp = space("a", "b")
    nu = _rand_povm(rng, sp, 3)
    ctx = context(nu)
    f, g = _rand_qrv(rng, sp, 3), _rand_qrv(rng, sp, 3)
    alpha, beta = 1.5 - 0.5j, -0.25 + 2j
    lhs = integrate_ctx(f.scale(alpha) + g.scale(beta), ctx)
    rhs = alpha * integrate_ctx(f, ctx) + beta * integrate_ctx(g, ctx)
    assert np.max(np.abs(lhs - rhs)) <= 1e-10 * (1 + np.max(np.abs(rhs)))


def test_integrate_reference_state_invariance():
    rng = np.random.default_rng(19)
    sp = space("a", "b", "c")
    for _ in range(30):
        dim = int(rng.integers(2, 4))
        nu = _rand_povm(rng, sp, dim)
        f = _rand_qrv(rng, sp, dim)
        out1 = integrate(f, nu, _rand_state(rng, dim))
        out2 = integrate(f, nu, _rand_state(rng, dim))
        assert np.max(np.abs(out1 - out2)) <= 1e-9 * (1 + np.max(np.abs(out1)))


def test_context_caches_sqrt_derivatives():
    rng = np.random.default_rng(23)
    sp = space("a", "b")
    nu = _rand_povm(rng, sp, 2)
    ctx = context(nu)
    for sq, d in zip(ctx.sqrt_derivs, ctx.derivs):
        np.testing.assert_allclose(sq @ sq, d, atol=1e-10)


def test_null_atom_value_does_not_affect_integral():
    sp = space("a", "b")
    nu = povm(sp, [np.zeros((2, 2)), np.eye(2)])
    base = np.array([[1.0, 0.2], [0.2, 0.5]])
    f1 = qrv(sp, [np.zeros((2, 2)), base])
    f2 = qrv(sp, [np.full((2, 2), 9.0), base])
    np.testing.assert_allclose(integrate(f1, nu), integrate(f2, nu), atol=1e-12)

"""Variational engine tests: state suprema, decomposition infima, and
cross-checks against the brute-force oracle."""

import numpy as np
import pytest

from povmnorms.errors import DomainError
from povmnorms.optimize import (
    SolverConfig,
    inf_block_dec,
    inf_decomposition_pnorm,
    sup_state_lp,
)
from povmnorms.oracle import OracleInstance, brute_force_oracle
from povmnorms.povm import density, maximally_mixed, povm, scalar_povm, space
from povmnorms.qrv import QRV, constant_qrv, context, qrv

CFG = SolverConfig(seed=7)


def unit_ctx(dim=2, weights=(1.0,)):
    sp = space(*[f"x{i}" for i in range(len(weights))])
    return context(scalar_povm(sp, list(weights), dim=dim))


def rand_qrv(rng, sp, dim, positive=False, hermitian=False):
    vals = rng.normal(size=(len(sp), dim, dim)) + 1j * rng.normal(size=(len(sp), dim, dim))
    if positive:
        vals = np.einsum("mik,mjk->mij", vals, vals.conj())
        vals /= max(np.linalg.norm(v, 2) for v in vals)
    elif hermitian:
        vals = (vals + np.conj(np.swapaxes(vals, -1, -2))) / 2
        vals /= max(np.linalg.norm(v, 2) for v in vals)
    else:
        vals /= max(np.linalg.norm(v, 2) for v in vals)
    return QRV(sp, vals, dim)


def rand_ctx(rng, dim, atoms):
    sp = space(*[f"x{i}" for i in range(atoms)])
    effects = []
    for _ in range(atoms):
        a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        effects.append(a @ a.conj().T)
    scale = np.linalg.norm(sum(effects), 2)
    return context(povm(sp, [e / scale for e in effects]))


# ---- sup_state_lp -------------------------------------------------------------


def test_sup_state_constant_multiple_of_identity_exact():
    for p in (1.0, 1.7, 3.0):
        for w in (0.5, 1.0, 2.0):
            ctx = unit_ctx(dim=2, weights=(w,))
            h = constant_qrv(ctx.space, 2.5 * np.eye(2))
            est = sup_state_lp(h, p, ctx, CFG)
            expect = 2.5 * w ** (1.0 / p)
            assert est.lower == pytest.approx(expect, abs=1e-9)
            assert est.upper == pytest.approx(expect, abs=1e-9)


def test_sup_state_projection_attained_at_basis_state():
    ctx = unit_ctx()
    h = qrv(ctx.space, [np.diag([2.0, 0.0])])
    est = sup_state_lp(h, 1.0, ctx, CFG)
    assert est.lower == pytest.approx(2.0, abs=1e-12)
    assert est.upper == pytest.approx(2.0, abs=1e-12)
    assert abs(est.witness[0]) == pytest.approx(1.0, abs=1e-9)


def test_sup_state_zero():
    ctx = unit_ctx()
    h = constant_qrv(ctx.space, np.zeros((2, 2)))
    est = sup_state_lp(h, 2.0, ctx, CFG)
    assert est.lower == 0.0 and est.upper == 0.0


def test_sup_state_rejects_non_positive():
    ctx = unit_ctx()
    h = qrv(ctx.space, [np.diag([1.0, -1.0])])
    with pytest.raises(DomainError):
        sup_state_lp(h, 2.0, ctx, CFG)


def test_sup_state_bracket_contains_oracle():
    rng = np.random.default_rng(31)
    for _ in range(6):
        dim = int(rng.integers(1, 3))
        atoms = int(rng.integers(1, 4))
        ctx = rand_ctx(rng, dim, atoms)
        h = rand_qrv(rng, ctx.space, dim, positive=True)
        p = float(rng.choice([1.0, 2.0, 3.0]))
        est = sup_state_lp(h, p, ctx, CFG)
        grid = brute_force_oracle("sup_state", OracleInstance(h, p, ctx))
        assert est.lower - 5e-3 <= grid <= est.upper + 5e-3


def test_pure_states_beat_sampled_mixed_states():
    rng = np.random.default_rng(37)
    for _ in range(200):
        dim = int(rng.integers(2, 4))
        atoms = int(rng.integers(1, 4))
        ctx = rand_ctx(rng, dim, atoms)
        h = rand_qrv(rng, ctx.space, dim, positive=True)
        p = float(rng.choice([1.5, 2.0, 3.0]))
        est = sup_state_lp(h, p, ctx, CFG)
        mats = ctx.pair_matrices(h)
        best_mixed = 0.0
        for _ in range(50):
            a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
            s = a @ a.conj().T
            s /= np.trace(s).real
            vals = np.maximum(np.einsum("ji,mij->m", s, mats).real, 0.0)
            best_mixed = max(best_mixed, float(np.sum(ctx.weights * vals**p) ** (1 / p)))
        assert est.lower >= best_mixed - 1e-7


# ---- inf_decomposition_pnorm ---------------------------------------------------


def test_pnorm_positive_shortcut_equals_sup_state():
    rng = np.random.default_rng(41)
    ctx = rand_ctx(rng, 2, 2)
    f = rand_qrv(rng, ctx.space, 2, positive=True)
    for p in (1.0, 2.0):
        direct = sup_state_lp(f, p, ctx, CFG)
        viapn = inf_decomposition_pnorm(f, p, ctx, CFG)
        assert viapn.lower == pytest.approx(direct.lower, abs=1e-12)
        assert viapn.upper == pytest.approx(direct.upper, abs=1e-12)


def test_pnorm_scalar_closed_form():
    ctx = unit_ctx(dim=1, weights=(1.0,))
    f = qrv(ctx.space, [np.array([[1.0 + 1.0j]])])
    for p in (1.0, 2.0, 3.0):
        est = inf_decomposition_pnorm(f, p, ctx, CFG)
        assert est.lower == pytest.approx(2.0, abs=1e-9)
        assert est.upper == pytest.approx(2.0, abs=1e-9)


def test_pnorm_sigma_z_unit_measure():
    ctx = unit_ctx(dim=2, weights=(1.0,))
    f = qrv(ctx.space, [np.diag([1.0, -1.0])])
    for p in (1.0, 2.0, 3.0):
        est = inf_decomposition_pnorm(f, p, ctx, CFG)
        assert est.lower == pytest.approx(1.0, abs=2e-3)
        assert est.upper == pytest.approx(1.0, abs=2e-3)


def test_pnorm_upper_history_monotone():
    rng = np.random.default_rng(43)
    ctx = rand_ctx(rng, 2, 3)
    f = rand_qrv(rng, ctx.space, 2)
    est = inf_decomposition_pnorm(f, 2.0, ctx, CFG)
    hist = est.history
    assert all(a >= b - 1e-12 for a, b in zip(hist, hist[1:]))


def test_pnorm_bracket_contains_oracle():
    rng = np.random.default_rng(47)
    for _ in range(5):
        dim = int(rng.integers(1, 3))
        atoms = int(rng.integers(1, 4))
        ctx = rand_ctx(rng, dim, atoms)
        kind = rng.choice(["gen", "herm", "pos"])
        f = rand_qrv(rng, ctx.space, dim, positive=kind == "pos", hermitian=kind == "herm")
        p = float(rng.choice([1.0, 2.0, 3.0]))
        est = inf_decomposition_pnorm(f, p, ctx, CFG)
        grid = brute_force_oracle("pnorm", OracleInstance(f, p, ctx))
        assert est.lower - 5e-3 <= grid <= est.upper + 5e-3


# ---- inf_block_dec --------------------------------------------------------------


def test_dec_zero_and_scalar():
    ctx = unit_ctx(dim=2)
    z = constant_qrv(ctx.space, np.zeros((2, 2)))
    assert inf_block_dec(z, 2.0, ctx, CFG).upper == 0.0

    ctx1 = unit_ctx(dim=1, weights=(1.0,))
    f = qrv(ctx1.space, [np.array([[1.0 + 1.0j]])])
    est = inf_block_dec(f, 2.0, ctx1, CFG)
    assert est.lower == pytest.approx(np.sqrt(2.0), abs=1e-9)
    assert est.upper == pytest.approx(np.sqrt(2.0), abs=1e-9)


def test_dec_selfadjoint_equals_pnorm():
    rng = np.random.default_rng(53)
    ctx = rand_ctx(rng, 2, 2)
    f = rand_qrv(rng, ctx.space, 2, hermitian=True)
    dec = inf_block_dec(f, 2.0, ctx, CFG)
    pn = inf_decomposition_pnorm(f, 2.0, ctx, CFG)
    assert dec.lower == pytest.approx(pn.lower, abs=1e-12)
    assert dec.upper == pytest.approx(pn.upper, abs=1e-12)
    assert dec.method.startswith("dec:selfadjoint=pnorm")


def test_dec_solver_path_overlaps_pnorm_on_hermitian():
    rng = np.random.default_rng(59)
    cfg = SolverConfig(seed=7, use_selfadjoint_shortcut=False)
    ctx = rand_ctx(rng, 2, 2)
    f = rand_qrv(rng, ctx.space, 2, hermitian=True)
    dec = inf_block_dec(f, 2.0, ctx, cfg)
    pn = inf_decomposition_pnorm(f, 2.0, ctx, CFG)
    assert dec.lower <= pn.upper + 1e-2
    assert pn.lower <= dec.upper + 1e-2


def test_dec_bracket_contains_oracle():
    rng = np.random.default_rng(61)
    for _ in range(4):
        dim = int(rng.integers(1, 3))
        atoms = int(rng.integers(1, 3))
        ctx = rand_ctx(rng, dim, atoms)
        f = rand_qrv(rng, ctx.space, dim)
        p = float(rng.choice([1.0, 2.0]))
        est = inf_block_dec(f, p, ctx, CFG)
        grid = brute_force_oracle("dec", OracleInstance(f, p, ctx))
        assert est.lower - 5e-3 <= grid <= est.upper + 5e-3


# ---- oracle self-consistency -----------------------------------------------------


def test_oracle_sup_state_projection():
    ctx = unit_ctx()
    h = qrv(ctx.space, [np.diag([2.0, 0.0])])
    val = brute_force_oracle("sup_state", OracleInstance(h, 1.0, ctx))
    assert val == pytest.approx(2.0, abs=1e-6)


def test_oracle_positive_pnorm_matches_sup_state():
    rng = np.random.default_rng(67)
    ctx = rand_ctx(rng, 2, 2)
    f = rand_qrv(rng, ctx.space, 2, positive=True)
    a = brute_force_oracle("pnorm", OracleInstance(f, 2.0, ctx))
    b = brute_force_oracle("sup_state", OracleInstance(f, 2.0, ctx))
    assert a == pytest.approx(b, abs=2e-3)


def test_oracle_dec_selfadjoint_matches_pnorm_oracle():
    rng = np.random.default_rng(71)
    ctx = rand_ctx(rng, 2, 2)
    f = rand_qrv(rng, ctx.space, 2, hermitian=True)
    a = brute_force_oracle("dec", OracleInstance(f, 2.0, ctx))
    b = brute_force_oracle("pnorm", OracleInstance(f, 2.0, ctx))
    assert a == pytest.approx(b, abs=5e-3)


def test_oracle_rejects_large_dims():
    ctx = unit_ctx(dim=3)
    h = constant_qrv(ctx.space, np.eye(3))
    with pytest.raises(DomainError):
        brute_force_oracle("sup_state", OracleInstance(h, 1.0, ctx))


def test_solver_config_validation():
    with pytest.raises(DomainError):
        SolverConfig(max_iters=0)
    with pytest.raises(DomainError):
        SolverConfig(step_rule="magic")

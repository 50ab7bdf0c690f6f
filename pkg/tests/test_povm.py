"""POVM, induced measure and Radon-Nikodym derivative tests."""

import numpy as np
import pytest

from povmnorms.povm import (DiscretePOVM, SampleSpace, density, induced_measure,
                            maximally_mixed, povm, rn_derivative, scalar_povm, space,
                            validate_povm)
from povmnorms.errors import DomainError


def _random_povm(rng, dim, atoms):
    effects = []
    for _ in range(atoms):
        a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        effects.append(a @ a.conj().T)
    scale = np.linalg.norm(sum(effects), 2)
    sp = space(*[f"x{i}" for i in range(atoms)])
    return povm(sp, [e / scale for e in effects])


def _random_full_rank_state(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    m = a @ a.conj().T + 0.1 * np.eye(dim)
    return density(m / np.trace(m).real)


def test_space_rejects_duplicates_and_empty():
    with pytest.raises(DomainError):
        space("a", "a")
    with pytest.raises(DomainError):
        SampleSpace(tuple())


def test_validate_povm_all_psd():
    sp = space("a", "b")
    nu = povm(sp, {"a": np.eye(2), "b": 0.5 * np.eye(2)})
    assert validate_povm(nu) == []


def test_validate_povm_flags_indefinite_effect():
    sp = space("a")
    nu = DiscretePOVM(sp, np.array([np.diag([1.0, -1.0])], dtype=complex), 2)
    problems = validate_povm(nu)
    assert len(problems) == 1 and "PSD" in problems[0]


def test_validate_povm_flags_dim_mismatch():
    sp = space("a")
    nu = DiscretePOVM(sp, np.array([np.eye(3)], dtype=complex), 2)
    assert any("dimension" in v for v in validate_povm(nu))


def test_povm_constructor_rejects_bad_effect():
    with pytest.raises(DomainError):
        povm(space("a"), [np.diag([1.0, -1.0])])


def test_induced_measure_identity_effect():
    nu = povm(space("a"), [np.eye(2)])
    mu = induced_measure(nu, maximally_mixed(2))
    assert mu.weight("a") == pytest.approx(1.0)


def test_induced_measure_trace_arithmetic():
    # tr((I/2) diag(1,0)) = 1/2
    nu = povm(space("a"), [np.diag([1.0, 0.0])])
    mu = induced_measure(nu, maximally_mixed(2))
    assert mu.weight("a") == pytest.approx(0.5)


def test_induced_measure_null_atom_and_total_mass():
    nu = povm(space("a", "b"), [np.zeros((2, 2)), np.eye(2)])
    mu = induced_measure(nu)
    assert mu.weight("a") == 0.0
    assert mu.total_mass() == pytest.approx(np.trace(maximally_mixed(2).matrix @ nu.total()).real)


def test_induced_measure_requires_full_rank():
    nu = povm(space("a"), [np.eye(2)])
    rank_deficient = density(np.diag([1.0, 0.0]))
    with pytest.raises(DomainError):
        induced_measure(nu, rank_deficient)


def test_rn_derivative_entrywise_ratio():
    nu = povm(space("a"), [np.eye(2)])
    d = rn_derivative(nu, maximally_mixed(2))
    np.testing.assert_allclose(d.value("a"), np.eye(2), atol=1e-12)

    nu2 = povm(space("a"), [np.diag([1.0, 0.0])])
    d2 = rn_derivative(nu2, maximally_mixed(2))
    np.testing.assert_allclose(d2.value("a"), np.diag([2.0, 0.0]), atol=1e-12)


def test_rn_derivative_scalar_measure_gives_identity():
    # nu = mu * I  =>  dnu/dnu_rho = I
    nu = scalar_povm(space("a", "b"), [0.3, 1.2], dim=3)
    d = rn_derivative(nu)
    for label in ("a", "b"):
        np.testing.assert_allclose(d.value(label), np.eye(3), atol=1e-12)


def test_reconstruction_property():
    rng = np.random.default_rng(101)
    for _ in range(100):
        dim = int(rng.integers(1, 5))
        atoms = int(rng.integers(1, 6))
        nu = _random_povm(rng, dim, atoms)
        rho = _random_full_rank_state(rng, dim)
        mu = induced_measure(nu, rho)
        d = rn_derivative(nu, rho)
        recon = d.values * mu.weights[:, None, None]
        assert np.max(np.abs(recon - nu.effects)) <= 1e-10 * (1 + np.max(np.abs(nu.effects)))


def test_null_sets_are_state_independent():
    rng = np.random.default_rng(202)
    sp = space("a", "b", "c")
    for _ in range(50):
        dim = int(rng.integers(1, 4))
        effects = [np.zeros((dim, dim))]
        for _ in range(2):
            a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
            effects.append(a @ a.conj().T)
        nu = povm(sp, effects)
        w1 = induced_measure(nu, _random_full_rank_state(rng, dim)).weights
        w2 = induced_measure(nu, _random_full_rank_state(rng, dim)).weights
        np.testing.assert_array_equal(w1 == 0.0, w2 == 0.0)


def test_mutual_absolute_continuity():
    rng = np.random.default_rng(303)
    for _ in range(50):
        dim = int(rng.integers(1, 4))
        nu = _random_povm(rng, dim, 3)
        rho = _random_full_rank_state(rng, dim)
        weights = induced_measure(nu, rho).weights
        for w, effect in zip(weights, nu.effects):
            if w == 0.0:
                assert np.max(np.abs(effect)) <= 1e-12
            else:
                assert np.max(np.abs(effect)) > 0


def test_density_validation():
    with pytest.raises(DomainError):
        density(np.eye(2))  # trace 2
    with pytest.raises(DomainError):
        density(np.diag([1.5, -0.5]))  # not PSD
    rho = density(np.diag([0.25, 0.75]))
    assert rho.full_rank

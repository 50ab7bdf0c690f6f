"""Seeded random instances for the verification suites.

Hypothesis enforcement is structural: commuting positive pairs are built by
simultaneous diagonalization (a shared Haar-ish unitary per atom), never by
rejection sampling.  Per-trial generators derive their stream from
(seed, trial index), so parallel and serial suite runs agree.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError
from .povm import DensityOperator, DiscretePOVM, SampleSpace, density, povm
from .qrv import QRV


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([seed, trial])


def haar_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Haar-ish unitary via QR of a complex Gaussian matrix."""
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(a)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _space(atoms: int) -> SampleSpace:
    return SampleSpace(tuple(f"x{i}" for i in range(atoms)))


def random_qrv(rng: np.random.Generator, dim: int, atoms: int) -> QRV:
    vals = rng.normal(size=(atoms, dim, dim)) + 1j * rng.normal(size=(atoms, dim, dim))
    vals /= max(np.linalg.norm(v, 2) for v in vals)
    return QRV(_space(atoms), vals, dim)


def random_hermitian_qrv(rng: np.random.Generator, dim: int, atoms: int) -> QRV:
    f = random_qrv(rng, dim, atoms)
    vals = (f.values + np.conj(np.swapaxes(f.values, -1, -2))) / 2
    return QRV(f.space, vals, dim)


def random_positive_qrv(rng: np.random.Generator, dim: int, atoms: int) -> QRV:
    vals = rng.normal(size=(atoms, dim, dim)) + 1j * rng.normal(size=(atoms, dim, dim))
    vals = np.einsum("mik,mjk->mij", vals, vals.conj())
    vals /= max(np.linalg.norm(v, 2) for v in vals)
    return QRV(_space(atoms), vals, dim)


def random_commuting_positive_pair(rng: np.random.Generator, dim: int, atoms: int):
    """(f, g) positive with f(x) g(x) = g(x) f(x) by construction."""
    sp = _space(atoms)
    fvals, gvals = [], []
    for _ in range(atoms):
        u = haar_unitary(rng, dim)
        lam_f = rng.uniform(0.0, 1.0, size=dim)
        lam_g = rng.uniform(0.0, 1.0, size=dim)
        fvals.append((u * lam_f) @ u.conj().T)
        gvals.append((u * lam_g) @ u.conj().T)
    return QRV(sp, np.stack(fvals), dim), QRV(sp, np.stack(gvals), dim)


def random_povm(rng: np.random.Generator, dim: int, atoms: int,
                full_rank: bool = True) -> DiscretePOVM:
    effects = []
    for _ in range(atoms):
        a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        e = a @ a.conj().T
        if full_rank:
            e = e + 0.05 * np.eye(dim)
        effects.append(e)
    scale = np.linalg.norm(np.sum(effects, axis=0), 2)
    return povm(_space(atoms), [e / scale for e in effects])


def random_state(rng: np.random.Generator, dim: int) -> DensityOperator:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    m = a @ a.conj().T + 0.05 * np.eye(dim)
    return density(m / np.trace(m).real)


def random_instance(kind: str, dims: int, atoms: int, seed: int):
    """Public one-shot generator (deterministic under seed)."""
    if dims < 1 or atoms < 1:
        raise DomainError("dims and atoms must be >= 1")
    rng = np.random.default_rng(seed)
    if kind == "qrv":
        return random_qrv(rng, dims, atoms)
    if kind == "positive_qrv":
        return random_positive_qrv(rng, dims, atoms)
    if kind == "commuting_positive_pair":
        return random_commuting_positive_pair(rng, dims, atoms)
    if kind == "povm":
        return random_povm(rng, dims, atoms)
    if kind == "state":
        return random_state(rng, dims)
    raise DomainError(f"unknown instance kind {kind!r}")

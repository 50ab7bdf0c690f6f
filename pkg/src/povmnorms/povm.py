"""Discrete POVMs on finite atomic sample spaces, the induced scalar measure
and the (atomwise) Radon-Nikodym derivative.

A POVM here assigns one PSD effect matrix to each atom.  Pairing with a
full-rank density operator rho gives the scalar measure with weights
tr(rho * effect); the derivative at an atom of positive weight is the
entrywise ratio effect / weight, and 0 on null atoms by convention.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg, tolerances
from .errors import DomainError


@dataclass(frozen=True)
class SampleSpace:
    """Finite, purely atomic sample space: an ordered tuple of unique labels."""

    atoms: tuple[str, ...]

    def __post_init__(self):
        if len(self.atoms) == 0:
            raise DomainError("sample space must be nonempty")
        if len(set(self.atoms)) != len(self.atoms):
            raise DomainError("atom labels must be unique")

    def __len__(self) -> int:
        return len(self.atoms)

    def index(self, label: str) -> int:
        return self.atoms.index(label)


def space(*atoms: str) -> SampleSpace:
    return SampleSpace(tuple(atoms))


@dataclass(frozen=True)
class DiscretePOVM:
    """One PSD effect per atom, acting on a dim-dimensional Hilbert space.

    ``effects`` is stored as a [m, dim, dim] complex array in atom order.
    """

    space: SampleSpace
    effects: np.ndarray
    dim: int

    def effect(self, label: str) -> np.ndarray:
        return self.effects[self.space.index(label)]

    def total(self) -> np.ndarray:
        """nu(X) = sum of all effects."""
        return np.sum(self.effects, axis=0)


def povm(space_: SampleSpace, effects, validate: bool = True) -> DiscretePOVM:
    """Build a DiscretePOVM from per-atom effects (dict by label or sequence).

    With ``validate`` the effects are required to be Hermitian and PSD within
    the default tolerance.
    """
    if isinstance(effects, dict):
        mats = [linalg.as_matrix(effects[a]) for a in space_.atoms]
    else:
        mats = [linalg.as_matrix(e) for e in effects]
    if len(mats) != len(space_):
        raise DomainError("one effect per atom required")
    dim = mats[0].shape[0]
    for m in mats:
        if m.shape[0] != dim:
            raise DomainError("effects must share one Hilbert space dimension")
    arr = np.stack(mats).astype(np.complex128)
    nu = DiscretePOVM(space=space_, effects=arr, dim=dim)
    if validate:
        problems = validate_povm(nu)
        if problems:
            raise DomainError("invalid POVM: " + "; ".join(problems))
    return nu


def scalar_povm(space_: SampleSpace, weights, dim: int) -> DiscretePOVM:
    """The POVM mu * I for a scalar measure mu (derivative identically I)."""
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0):
        raise DomainError("scalar measure weights must be nonnegative")
    eye = np.eye(dim, dtype=np.complex128)
    return DiscretePOVM(space=space_, effects=np.stack([wi * eye for wi in w]), dim=dim)


def validate_povm(nu: DiscretePOVM, tol: float | None = None) -> list[str]:
    """Violations of the POVM contract, as data (empty list iff valid)."""
    out: list[str] = []
    if nu.effects.ndim != 3 or nu.effects.shape[0] != len(nu.space):
        out.append("effects array must be [atoms, dim, dim]")
        return out
    if nu.effects.shape[1] != nu.dim or nu.effects.shape[2] != nu.dim:
        out.append(f"dimension mismatch: effects are {nu.effects.shape[1:]} but dim={nu.dim}")
        return out
    for label, e in zip(nu.space.atoms, nu.effects):
        if not linalg.is_hermitian(e, tol):
            out.append(f"effect at atom '{label}' is not Hermitian")
        elif not linalg.psd_check(e, tol):
            out.append(f"effect at atom '{label}' is not PSD")
    return out


@dataclass(frozen=True)
class DensityOperator:
    """Positive trace-one operator; ``full_rank`` is decided at rank_tol."""

    matrix: np.ndarray
    full_rank: bool = field(compare=False, default=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def density(matrix, trace_tol: float = 1e-10, tol: float | None = None) -> DensityOperator:
    m = linalg.require_hermitian(matrix, tol, "density operator")
    tr = float(np.trace(m).real)
    if abs(tr - 1.0) > trace_tol:
        raise DomainError(f"density operator must have trace 1, got {tr}")
    if not linalg.psd_check(m, tol):
        raise DomainError("density operator must be PSD")
    lam_min = linalg.min_eig(m)
    return DensityOperator(matrix=m, full_rank=bool(lam_min > tolerances.rank_tol()))


def maximally_mixed(dim: int) -> DensityOperator:
    """The canonical reference state I/dim."""
    return DensityOperator(matrix=np.eye(dim, dtype=np.complex128) / dim, full_rank=True)


def pure_state(vec) -> DensityOperator:
    v = np.asarray(vec, dtype=np.complex128).ravel()
    v = v / np.linalg.norm(v)
    return DensityOperator(matrix=np.outer(v, v.conj()), full_rank=v.size == 1)


@dataclass(frozen=True)
class ScalarMeasure:
    """Nonnegative weight per atom (the mass of nu_rho at the atom)."""

    space: SampleSpace
    weights: np.ndarray

    def weight(self, label: str) -> float:
        return float(self.weights[self.space.index(label)])

    def total_mass(self) -> float:
        return float(np.sum(self.weights))


@dataclass(frozen=True)
class RNDerivative:
    """dnu/dnu_rho per atom: PSD on positive-weight atoms, 0 on null atoms."""

    space: SampleSpace
    values: np.ndarray

    def value(self, label: str) -> np.ndarray:
        return self.values[self.space.index(label)]


def _require_reference(nu: DiscretePOVM, rho: DensityOperator) -> DensityOperator:
    if rho.dim != nu.dim:
        raise DomainError(f"state dim {rho.dim} does not match POVM dim {nu.dim}")
    if not rho.full_rank:
        raise DomainError("reference state must be full rank (mutual absolute continuity)")
    return rho


def induced_measure(nu: DiscretePOVM, rho: DensityOperator | None = None) -> ScalarMeasure:
    """nu_rho with weights tr(rho * nu({x})); rho defaults to I/dim."""
    rho = _require_reference(nu, rho if rho is not None else maximally_mixed(nu.dim))
    w = np.einsum("ij,mji->m", rho.matrix, nu.effects).real
    w = np.maximum(w, 0.0)
    return ScalarMeasure(space=nu.space, weights=w)


def rn_derivative(nu: DiscretePOVM, rho: DensityOperator | None = None) -> RNDerivative:
    """Atomwise dnu/dnu_rho: effect / weight on positive-weight atoms, else 0."""
    rho = rho if rho is not None else maximally_mixed(nu.dim)
    weights = induced_measure(nu, rho).weights
    values = np.zeros_like(nu.effects)
    for k, w in enumerate(weights):
        if w > 0.0:
            values[k] = nu.effects[k] / w
    return RNDerivative(space=nu.space, values=values)

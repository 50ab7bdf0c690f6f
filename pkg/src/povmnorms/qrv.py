"""Quantum random variables on a discrete sample space: pointwise algebra,
the state pairing, and operator-valued integration against a POVM.

All norm machinery consumes a MeasureContext, which caches the weights and
the square roots of the Radon-Nikodym derivative once per (POVM, state) pair.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import DomainError
from .povm import (
    DensityOperator,
    DiscretePOVM,
    RNDerivative,
    SampleSpace,
    induced_measure,
    maximally_mixed,
    rn_derivative,
)


@dataclass(frozen=True)
class QRV:
    """One complex matrix per atom."""

    space: SampleSpace
    values: np.ndarray
    dim: int

    def value(self, label: str) -> np.ndarray:
        return self.values[self.space.index(label)]

    # ----- pointwise algebra -------------------------------------------------

    def __add__(self, other: "QRV") -> "QRV":
        _same_shape(self, other)
        return QRV(self.space, self.values + other.values, self.dim)

    def __sub__(self, other: "QRV") -> "QRV":
        _same_shape(self, other)
        return QRV(self.space, self.values - other.values, self.dim)

    def scale(self, lam: complex) -> "QRV":
        return QRV(self.space, complex(lam) * self.values, self.dim)

    def __mul__(self, lam: complex) -> "QRV":
        return self.scale(lam)

    __rmul__ = __mul__

    def __neg__(self) -> "QRV":
        return self.scale(-1.0)

    def adjoint(self) -> "QRV":
        return QRV(self.space, np.conj(np.swapaxes(self.values, -1, -2)), self.dim)

    def re(self) -> "QRV":
        return QRV(self.space, (self.values + np.conj(np.swapaxes(self.values, -1, -2))) / 2, self.dim)

    def im(self) -> "QRV":
        return QRV(self.space, (self.values - np.conj(np.swapaxes(self.values, -1, -2))) / 2j, self.dim)

    def abs(self) -> "QRV":
        """Atomwise |f| = (f* f)^{1/2}."""
        vals = np.stack([linalg.polar_parts(v)[0] for v in self.values])
        return QRV(self.space, vals, self.dim)

    def abs_star(self) -> "QRV":
        """Atomwise |f*| = (f f*)^{1/2}."""
        vals = np.stack([linalg.polar_parts(v)[1] for v in self.values])
        return QRV(self.space, vals, self.dim)

    def pointwise_mul(self, other: "QRV") -> "QRV":
        """Atomwise matrix product.  A product of positive QRVs need not be
        positive unless the factors commute; see :func:`commutes`."""
        _same_shape(self, other)
        return QRV(self.space, np.einsum("mik,mkj->mij", self.values, other.values), self.dim)

    def pointwise_power(self, t: float) -> "QRV":
        """Atomwise fractional power; requires an atomwise-PSD QRV."""
        vals = []
        for label, v in zip(self.space.atoms, self.values):
            try:
                vals.append(linalg.matrix_power(v, t))
            except DomainError as exc:
                raise DomainError(f"pointwise_power at atom '{label}': {exc}") from exc
        return QRV(self.space, np.stack(vals), self.dim)

    # ----- predicates --------------------------------------------------------

    def is_hermitian(self, tol: float | None = None) -> bool:
        return all(linalg.is_hermitian(v, tol) for v in self.values)

    def is_positive(self, tol: float | None = None) -> bool:
        return self.is_hermitian(tol) and all(linalg.psd_check(v, tol) for v in self.values)

    def op_norms(self) -> np.ndarray:
        """||f(x)|| per atom."""
        return np.array([linalg.spectral_norm(v) for v in self.values])


def _same_shape(f: QRV, g: QRV) -> None:
    if f.space != g.space or f.dim != g.dim:
        raise DomainError("QRVs must share sample space and dimension")


def qrv(space_: SampleSpace, values, dim: int | None = None) -> QRV:
    """Build a QRV from per-atom matrices (dict by label or sequence)."""
    if isinstance(values, dict):
        mats = [linalg.as_matrix(values[a]) for a in space_.atoms]
    else:
        mats = [linalg.as_matrix(v) for v in values]
    if len(mats) != len(space_):
        raise DomainError("one value per atom required")
    d = mats[0].shape[0] if dim is None else dim
    for m in mats:
        if m.shape[0] != d:
            raise DomainError("QRV values must share one dimension")
    return QRV(space=space_, values=np.stack(mats).astype(np.complex128), dim=d)


def constant_qrv(space_: SampleSpace, matrix) -> QRV:
    m = linalg.as_matrix(matrix)
    return QRV(space=space_, values=np.stack([m] * len(space_)), dim=m.shape[0])


def commutes(f: QRV, g: QRV, tol: float = 1e-10) -> bool:
    """Atomwise commutation check, max ||[f(x), g(x)]||_F <= tol * scale."""
    _same_shape(f, g)
    scale = 1.0 + max(np.max(f.op_norms()), np.max(g.op_norms())) ** 2
    worst = max(linalg.commutator_norm(a, b) for a, b in zip(f.values, g.values))
    return worst <= tol * scale


# ----- measure context -------------------------------------------------------


@dataclass(frozen=True)
class MeasureContext:
    """Immutable cache of everything norms need about (nu, rho):

    weights of the induced scalar measure, the derivative values D(x) and
    their PSD square roots.  ``factor_dims`` is set for tensor-product
    contexts so separable-state machinery knows the factorization.
    """

    space: SampleSpace
    dim: int
    weights: np.ndarray
    derivs: np.ndarray
    sqrt_derivs: np.ndarray
    povm: DiscretePOVM | None = None
    rho: DensityOperator | None = None
    factor_dims: tuple[int, int] | None = None

    @property
    def support(self) -> np.ndarray:
        return self.weights > 0.0

    def deriv_inf_norm(self) -> float:
        """Essential sup ||D||_inf over positive-weight atoms."""
        sup = 0.0
        for w, d in zip(self.weights, self.derivs):
            if w > 0.0:
                sup = max(sup, linalg.spectral_norm(d))
        return sup

    def deriv_min_eig(self) -> float:
        """Smallest eigenvalue of D over positive-weight atoms (invertibility gate)."""
        low = np.inf
        for w, d in zip(self.weights, self.derivs):
            if w > 0.0:
                low = min(low, linalg.min_eig(d))
        return 0.0 if np.isinf(low) else float(low)

    def pair_matrices(self, f: QRV) -> np.ndarray:
        """M(x) = D(x)^{1/2} f(x) D(x)^{1/2}, stacked [m, d, d]."""
        if f.space != self.space or f.dim != self.dim:
            raise DomainError("QRV does not match context")
        return np.einsum("mik,mkl,mlj->mij", self.sqrt_derivs, f.values, self.sqrt_derivs)


def context(nu: DiscretePOVM, rho: DensityOperator | None = None) -> MeasureContext:
    """Build the (nu, rho) context; rho defaults to the maximally mixed state."""
    rho = rho if rho is not None else maximally_mixed(nu.dim)
    weights = induced_measure(nu, rho).weights
    derivs = rn_derivative(nu, rho).values
    sqrts = np.stack([linalg.sqrtm_psd(d) for d in derivs])
    return MeasureContext(
        space=nu.space,
        dim=nu.dim,
        weights=weights,
        derivs=derivs,
        sqrt_derivs=sqrts,
        povm=nu,
        rho=rho,
    )


def raw_context(space_: SampleSpace, weights, derivs, factor_dims=None) -> MeasureContext:
    """Context from explicit (weights, derivative values); used for tensor
    products where the base measure is prescribed rather than induced."""
    w = np.asarray(weights, dtype=float)
    dv = np.asarray(derivs, dtype=np.complex128)
    sqrts = np.stack([linalg.sqrtm_psd(d) for d in dv])
    return MeasureContext(
        space=space_,
        dim=dv.shape[1],
        weights=w,
        derivs=dv,
        sqrt_derivs=sqrts,
        factor_dims=factor_dims,
    )


# ----- pairing and integration -----------------------------------------------


def pairing(f: QRV, s: DensityOperator, deriv: RNDerivative | MeasureContext):
    """The scalar function f_s(x) = tr(s D(x)^{1/2} f(x) D(x)^{1/2}).

    Returns one value per atom; real-valued when f is Hermitian.
    """
    if isinstance(deriv, MeasureContext):
        sq = deriv.sqrt_derivs
    else:
        sq = np.stack([linalg.sqrtm_psd(d) for d in deriv.values])
    if s.dim != f.dim:
        raise DomainError("state dimension does not match QRV")
    m = np.einsum("mik,mkl,mlj->mij", sq, f.values, sq)
    vals = np.einsum("ji,mij->m", s.matrix, m)
    if f.is_hermitian():
        return vals.real
    return vals


def integrate(f: QRV, nu: DiscretePOVM, rho: DensityOperator | None = None) -> np.ndarray:
    """The operator-valued integral of f against nu.

    Equals sum_x w(x) D(x)^{1/2} f(x) D(x)^{1/2}, the unique matrix whose
    pairing with every state s reproduces the scalar integral of f_s; it does
    not depend on the full-rank reference state.
    """
    ctx = context(nu, rho)
    return integrate_ctx(f, ctx)


def integrate_ctx(f: QRV, ctx: MeasureContext) -> np.ndarray:
    m = ctx.pair_matrices(f)
    return np.einsum("m,mij->ij", ctx.weights, m)

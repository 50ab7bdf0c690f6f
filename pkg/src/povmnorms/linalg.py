"""Dense complex-matrix calculus: Hermitian structure, the Loewner order,
spectral functions, Schatten norms, polar parts and Kronecker products.

Everything routes through numpy's symmetric eigensolver / SVD, which is the
single numerical trust root of the package.  Matrices are plain complex
ndarrays; "Hermitian" and "PSD" are predicates checked against absolute
tolerances scaled by (1 + ||A||_2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tolerances
from .errors import DomainError


def as_matrix(a) -> np.ndarray:
    """Coerce to a square complex128 matrix."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {m.shape}")
    return m


def hermitianize(a: np.ndarray) -> np.ndarray:
    """Hermitian part (A + A*) / 2."""
    a = as_matrix(a)
    return (a + a.conj().T) / 2


def is_hermitian(a: np.ndarray, tol: float | None = None) -> bool:
    a = as_matrix(a)
    if tol is None:
        tol = tolerances.herm_tol()
    scale = 1.0 + spectral_norm(a)
    return bool(np.max(np.abs(a - a.conj().T)) <= tol * scale)


def require_hermitian(a: np.ndarray, tol: float | None = None, what: str = "matrix") -> np.ndarray:
    a = as_matrix(a)
    if not is_hermitian(a, tol):
        raise DomainError(f"{what} is not Hermitian within tolerance")
    return hermitianize(a)


def spectral_norm(a: np.ndarray) -> float:
    """Operator (largest singular value) norm."""
    a = np.asarray(a, dtype=np.complex128)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def frobenius(a: np.ndarray) -> float:
    return float(np.linalg.norm(np.asarray(a), "fro"))


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigensystem of a Hermitian matrix, eigenvalues ascending.

    Reconstruction ``U diag(w) U*`` agrees with the input to within
    ``recon_tol * ||A||_F``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.conj().T


def spectral_decomposition(a: np.ndarray, tol: float | None = None) -> SpectralDecomposition:
    a = require_hermitian(a, tol)
    w, u = np.linalg.eigh(a)
    return SpectralDecomposition(eigenvalues=w, eigenvectors=u)


def psd_check(a: np.ndarray, tol: float | None = None) -> bool:
    """True iff the Hermitian matrix ``a`` has lambda_min >= -tol.

    The tolerance is scaled by (1 + ||a||_2).  Non-Hermitian input raises.
    """
    a = require_hermitian(a, tol if tol is not None else None)
    if tol is None:
        tol = tolerances.psd_tol()
    w = np.linalg.eigvalsh(a)
    scale = 1.0 + (abs(w[-1]) if w.size else 0.0)
    scale = max(scale, 1.0 + (abs(w[0]) if w.size else 0.0))
    return bool(w[0] >= -tol * scale) if w.size else True


def loewner_geq(a: np.ndarray, b: np.ndarray, tol: float | None = None) -> bool:
    """Loewner order test A >= B, i.e. A - B is PSD within ``tol``."""
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape != b.shape:
        raise DomainError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return psd_check(a - b, tol)


def matrix_power(a: np.ndarray, t: float, tol: float | None = None) -> np.ndarray:
    """Fractional power of a PSD matrix via spectral calculus.

    Eigenvalues in [-psd_tol, 0) are clamped to 0; the convention 0^t = 0
    applies for every t >= 0 (so t = 0 yields the support projection).
    Negative eigenvalues beyond tolerance raise DomainError.
    """
    if t < 0:
        raise DomainError("matrix_power requires t >= 0")
    if tol is None:
        tol = tolerances.psd_tol()
    dec = spectral_decomposition(a, tol)
    w = dec.eigenvalues
    scale = 1.0 + (np.max(np.abs(w)) if w.size else 0.0)
    if w.size and w[0] < -tol * scale:
        raise DomainError(f"matrix is not PSD: lambda_min = {w[0]:.3e}")
    w = np.where(w > 0.0, w, 0.0)
    powered = np.where(w > 0.0, w ** float(t), 0.0)
    u = dec.eigenvectors
    return (u * powered) @ u.conj().T


def sqrtm_psd(a: np.ndarray, tol: float | None = None) -> np.ndarray:
    """PSD square root, A^{1/2}."""
    return matrix_power(a, 0.5, tol)


def schatten_norm(a: np.ndarray, p: float) -> float:
    """Schatten p-norm: the l^p norm of the singular values (p = inf gives
    the operator norm)."""
    a = as_matrix(a)
    if np.isinf(p):
        return spectral_norm(a)
    if p < 1:
        raise DomainError(f"Schatten norm requires p >= 1, got {p}")
    sv = np.linalg.svd(a, compute_uv=False)
    if p == 1:
        return float(np.sum(sv))
    return float(np.sum(sv ** p) ** (1.0 / p))


def polar_parts(a: np.ndarray, cutoff: float = 1e-12):
    """Polar data of ``a``: (|a|, |a*|, u) with a = u |a|.

    |a| = (a* a)^{1/2}, |a*| = (a a*)^{1/2}; u is the partial isometry from
    the SVD restricted to singular values above ``cutoff * (1 + sigma_max)``,
    so u* u is the projection onto range(|a|).
    """
    a = as_matrix(a)
    u_l, sv, v_h = np.linalg.svd(a)
    v = v_h.conj().T
    abs_a = (v * sv) @ v.conj().T
    abs_a_star = (u_l * sv) @ u_l.conj().T
    thresh = cutoff * (1.0 + (sv[0] if sv.size else 0.0))
    keep = sv > thresh
    u = (u_l[:, keep]) @ (v[:, keep].conj().T)
    return hermitianize(abs_a), hermitianize(abs_a_star), u


def hermitian_parts(a: np.ndarray):
    """Cartesian decomposition a = Re + i Im with Re, Im Hermitian."""
    a = as_matrix(a)
    re = (a + a.conj().T) / 2
    im = (a - a.conj().T) / (2j)
    return re, im


def pos_neg_parts(h: np.ndarray, tol: float | None = None):
    """Jordan decomposition H = H+ - H- with H+, H- PSD and H+ H- = 0."""
    dec = spectral_decomposition(h, tol)
    w, u = dec.eigenvalues, dec.eigenvectors
    pos = (u * np.maximum(w, 0.0)) @ u.conj().T
    neg = (u * np.maximum(-w, 0.0)) @ u.conj().T
    return hermitianize(pos), hermitianize(neg)


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product (dims multiply; PSD x PSD stays PSD)."""
    return np.kron(as_matrix(a), as_matrix(b))


def commutator_norm(a: np.ndarray, b: np.ndarray) -> float:
    """Frobenius norm of [a, b]; ~0 certifies a commuting pair."""
    a = as_matrix(a)
    b = as_matrix(b)
    return frobenius(a @ b - b @ a)


def clamp_psd(a: np.ndarray) -> np.ndarray:
    """Projection of a Hermitian matrix onto the PSD cone (eigenvalue clamp)."""
    w, u = np.linalg.eigh(hermitianize(a))
    return (u * np.maximum(w, 0.0)) @ u.conj().T


def batched_clamp_psd(stack: np.ndarray) -> np.ndarray:
    """PSD projection applied along the first axis of a [m, d, d] stack."""
    h = (stack + np.conj(np.swapaxes(stack, -1, -2))) / 2
    if h.shape[-1] == 2:
        return _clamp_psd_2x2(h)
    w, u = np.linalg.eigh(h)
    w = np.maximum(w, 0.0)
    return np.einsum("mik,mk,mjk->mij", u, w, np.conj(u))


def _clamp_psd_2x2(h: np.ndarray) -> np.ndarray:
    """Closed-form PSD projection for stacks of 2x2 Hermitian matrices."""
    a = h[..., 0, 0].real
    c = h[..., 1, 1].real
    b = h[..., 0, 1]
    mu = (a + c) / 2
    r = np.sqrt(((a - c) / 2) ** 2 + np.abs(b) ** 2)
    lam_hi = mu + r
    lam_lo = mu - r
    hi = np.maximum(lam_hi, 0.0)
    lo = np.maximum(lam_lo, 0.0)
    eye = np.eye(2, dtype=np.complex128)
    out = np.empty_like(h)
    safe = r > 1e-300
    r_safe = np.where(safe, r, 1.0)
    # spectral projector onto the top eigenvector: (H - lam_lo I) / (2r)
    p_hi = (h - lam_lo[..., None, None] * eye) / (2 * r_safe[..., None, None])
    out = hi[..., None, None] * p_hi + lo[..., None, None] * (eye - p_hi)
    degenerate = ~safe
    if np.any(degenerate):
        out[degenerate] = np.maximum(mu[degenerate], 0.0)[..., None, None] * eye
    return out


def min_eig(a: np.ndarray) -> float:
    a = hermitianize(a)
    w = np.linalg.eigvalsh(a)
    return float(w[0]) if w.size else 0.0

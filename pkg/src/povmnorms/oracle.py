"""Brute-force verification oracle for tiny instances (dim <= 2, <= 3 atoms).

Independent of the solvers in optimize.py: state suprema are taken over
dense Bloch-angle grids with local zooming, and the decomposition infima are
solved as conic programs (interior point, via cvxpy) over an accumulating
dense-grid state set.  The reported number for an infimum is always the
zoomed dense-grid value at the conic optimum, i.e. a feasible-point grid
evaluation; successive state-set refinements must agree before returning.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .qrv import QRV, MeasureContext

_TINY = 1e-11


@dataclass(frozen=True)
class OracleInstance:
    """One problem instance: the QRV, its exponent(s) and the measure context."""

    f: QRV
    p: float
    ctx: MeasureContext
    q: float | None = None


def _check_scale(ctx: MeasureContext):
    if ctx.dim > 2:
        raise DomainError("brute-force oracle supports dim <= 2 only")
    if len(ctx.space) > 3:
        raise DomainError("brute-force oracle supports at most 3 atoms")


def _psis_of(thetas: np.ndarray, phis: np.ndarray) -> np.ndarray:
    return np.stack(
        [np.cos(thetas / 2).astype(np.complex128), np.exp(1j * phis) * np.sin(thetas / 2)],
        axis=1,
    )


def _zoomed_state_max(values_of, n: int, levels: int = 3):
    """Maximize a function of pure dim-2 states: dense grid, then local zoom.

    Returns (best value, best state vector).
    """
    thetas = np.linspace(0.0, np.pi, n)
    phis = np.linspace(0.0, 2 * np.pi, 2 * n, endpoint=False)
    tt, pp = np.meshgrid(thetas, phis, indexing="ij")
    flat_t, flat_p = tt.ravel(), pp.ravel()
    vals = values_of(_psis_of(flat_t, flat_p))
    k = int(np.argmax(vals))
    best, bt, bp = float(vals[k]), float(flat_t[k]), float(flat_p[k])
    dt, dp = np.pi / max(n - 1, 1), np.pi / n
    for _ in range(levels):
        lt = np.linspace(max(0.0, bt - dt), min(np.pi, bt + dt), 9)
        lp = np.linspace(bp - dp, bp + dp, 9)
        ltt, lpp = np.meshgrid(lt, lp, indexing="ij")
        fl_t, fl_p = ltt.ravel(), lpp.ravel()
        vals = values_of(_psis_of(fl_t, fl_p))
        k = int(np.argmax(vals))
        if vals[k] > best:
            best, bt, bp = float(vals[k]), float(fl_t[k]), float(fl_p[k])
        dt, dp = dt / 3, dp / 3
    return best, _psis_of(np.array([bt]), np.array([bp]))[0]


def _grid_psis(n: int) -> np.ndarray:
    thetas = np.linspace(0.0, np.pi, n)
    phis = np.linspace(0.0, 2 * np.pi, 2 * n, endpoint=False)
    tt, pp = np.meshgrid(thetas, phis, indexing="ij")
    return _psis_of(tt.ravel(), pp.ravel())


def _chi_vectors(ctx: MeasureContext, psis: np.ndarray) -> np.ndarray:
    """chi[x, s] = K_x psi_s so that <psi|K A K|psi> = <chi|A|chi>."""
    return np.einsum("mij,sj->msi", ctx.sqrt_derivs, psis)


def _sup_state_value(h_vals: np.ndarray, ctx: MeasureContext, p: float, n: int,
                     return_state: bool = False):
    w = ctx.weights
    if ctx.dim == 1:
        q = np.maximum(np.einsum("mij,mjk->m", ctx.derivs, h_vals).real, 0.0)
        total = float(np.sum(w * q**p))
        val = total ** (1.0 / p) if total > 0 else 0.0
        return (val, np.ones(1, dtype=np.complex128)) if return_state else val

    def values_of(psis):
        chi = _chi_vectors(ctx, psis)
        q = np.maximum(np.einsum("msi,mij,msj->sm", chi.conj(), h_vals, chi).real, 0.0)
        return np.sum(w[None, :] * q**p, axis=1)

    best, psi = _zoomed_state_max(values_of, n)
    val = best ** (1.0 / p) if best > 0 else 0.0
    return (val, psi) if return_state else val


def _smixed_value(f_vals: np.ndarray, ctx: MeasureContext, q: float, n: int) -> float:
    w = ctx.weights
    mats = np.einsum("mik,mkl,mlj->mij", ctx.sqrt_derivs, f_vals, ctx.sqrt_derivs)
    if ctx.dim == 1:
        t = np.abs(mats[:, 0, 0])
        total = float(np.sum(w * t**q))
        return total ** (1.0 / q) if total > 0 else 0.0

    def values_of(psis):
        z = np.einsum("si,mij,sj->sm", psis.conj(), mats, psis)
        return np.sum(w[None, :] * np.abs(z) ** q, axis=1)

    best, _ = _zoomed_state_max(values_of, n)
    return best ** (1.0 / q) if best > 0 else 0.0


# ---------------------------------------------------------------------------
# conic decomposition infima over accumulated state grids
# ---------------------------------------------------------------------------


def _solve_conic(problem) -> float:
    import warnings

    import cvxpy as cp

    for solver in (cp.CLARABEL, cp.SCS):
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                problem.solve(solver=solver)
        except cp.error.SolverError:
            continue
        if problem.status in ("optimal", "optimal_inaccurate"):
            return float(problem.value)
    raise RuntimeError(f"conic oracle solve failed (status {problem.status})")


def _state_terms(chi: np.ndarray, g_exprs, w: np.ndarray, p: float):
    """cvxpy vector [w_x^{1/p} <chi_x|g_x|chi_x>] for one state's chi rows."""
    import cvxpy as cp

    terms = []
    for x, gx in enumerate(g_exprs):
        c = np.outer(chi[x], chi[x].conj())
        terms.append(w[x] ** (1.0 / p) * cp.real(cp.trace(c @ gx)))
    return cp.hstack(terms)


def _restricted_pnorm_conic(f: QRV, p: float, ctx: MeasureContext, psis: np.ndarray):
    import cvxpy as cp

    m, d = len(ctx.space), ctx.dim
    re_f = (f.values + np.conj(np.swapaxes(f.values, -1, -2))) / 2
    im_f = (f.values - np.conj(np.swapaxes(f.values, -1, -2))) / 2j
    chi_all = _chi_vectors(ctx, psis)  # [m, S, d]

    y1 = [cp.Variable((d, d), hermitian=True) for _ in range(m)]
    y3 = [cp.Variable((d, d), hermitian=True) for _ in range(m)]
    cons = []
    g_exprs = []
    for x in range(m):
        cons += [y1[x] >> 0, y1[x] - re_f[x] >> 0, y3[x] >> 0, y3[x] - im_f[x] >> 0]
        g_exprs.append(2 * y1[x] - re_f[x] + 2 * y3[x] - im_f[x])
    t = cp.Variable()
    for s in range(psis.shape[0]):
        cons.append(cp.norm(_state_terms(chi_all[:, s], g_exprs, ctx.weights, p), p) <= t)
    value = _solve_conic(cp.Problem(cp.Minimize(t), cons))
    g_opt = np.stack([np.asarray(gx.value) for gx in g_exprs])
    g_opt = (g_opt + np.conj(np.swapaxes(g_opt, -1, -2))) / 2
    return value, g_opt


def _restricted_dec_conic(f: QRV, p: float, ctx: MeasureContext, psis: np.ndarray):
    import cvxpy as cp

    m, d = len(ctx.space), ctx.dim
    chi_all = _chi_vectors(ctx, psis)
    s1 = [cp.Variable((d, d), hermitian=True) for _ in range(m)]
    s2 = [cp.Variable((d, d), hermitian=True) for _ in range(m)]
    cons = []
    for x in range(m):
        cons.append(cp.bmat([[s1[x], f.values[x]],
                             [f.values[x].conj().T, s2[x]]]) >> 0)
    t = cp.Variable()
    for s in range(psis.shape[0]):
        cons.append(cp.norm(_state_terms(chi_all[:, s], s1, ctx.weights, p), p) <= t)
        cons.append(cp.norm(_state_terms(chi_all[:, s], s2, ctx.weights, p), p) <= t)
    value = _solve_conic(cp.Problem(cp.Minimize(t), cons))
    out1 = np.stack([np.asarray(v.value) for v in s1])
    out2 = np.stack([np.asarray(v.value) for v in s2])
    out1 = (out1 + np.conj(np.swapaxes(out1, -1, -2))) / 2
    out2 = (out2 + np.conj(np.swapaxes(out2, -1, -2))) / 2
    return value, out1, out2


def _refine_states(psis: np.ndarray, new_states: list[np.ndarray]) -> np.ndarray:
    keep = [psis]
    for psi in new_states:
        overlap = np.abs(psis @ psi.conj())
        if np.max(overlap) < 1.0 - 1e-9:
            keep.append(psi[None])
    return np.concatenate(keep, axis=0)


def _pnorm_search(inst: OracleInstance, resolution: int) -> float:
    ctx, p, f = inst.ctx, inst.p, inst.f
    if np.max(np.abs(f.values)) < 1e-14 or np.all(ctx.weights <= 0):
        return 0.0
    if ctx.dim == 1:
        d_scalar = ctx.derivs[:, 0, 0].real
        vals = f.values[:, 0, 0]
        g = (np.abs(vals.real) + np.abs(vals.imag)) * d_scalar
        total = float(np.sum(ctx.weights * g**p))
        return total ** (1.0 / p) if total > 0 else 0.0

    psis = _grid_psis(max(resolution // 4, 6))
    feasible_val = np.inf
    for _round in range(4):
        restricted, g_opt = _restricted_pnorm_conic(f, p, ctx, psis)
        val, psi_star = _sup_state_value(g_opt, ctx, p, 2 * resolution, return_state=True)
        feasible_val = min(feasible_val, val)
        if val - restricted <= 5e-4 * (1.0 + val):
            break
        psis = _refine_states(psis, [psi_star])
    return feasible_val


def _dec_search(inst: OracleInstance, resolution: int) -> float:
    ctx, p, f = inst.ctx, inst.p, inst.f
    if np.max(np.abs(f.values)) < 1e-14 or np.all(ctx.weights <= 0):
        return 0.0
    if ctx.dim == 1:
        d_scalar = ctx.derivs[:, 0, 0].real
        t = d_scalar * np.abs(f.values[:, 0, 0])
        total = float(np.sum(ctx.weights * t**p))
        return total ** (1.0 / p) if total > 0 else 0.0

    psis = _grid_psis(max(resolution // 4, 6))
    feasible_val = np.inf
    for _round in range(4):
        restricted, s1, s2 = _restricted_dec_conic(f, p, ctx, psis)
        v1, psi1 = _sup_state_value(s1, ctx, p, 2 * resolution, return_state=True)
        v2, psi2 = _sup_state_value(s2, ctx, p, 2 * resolution, return_state=True)
        val = max(v1, v2)
        feasible_val = min(feasible_val, val)
        if val - restricted <= 5e-4 * (1.0 + val):
            break
        psis = _refine_states(psis, [psi1, psi2])
    return feasible_val


def brute_force_oracle(problem: str, instance: OracleInstance, resolution: int = 32) -> float:
    """Grid value of the requested variational problem.

    problem is one of "sup_state", "pnorm", "dec", "smixed".  Suprema are
    zoomed dense-grid maxima accurate to roughly the grid resolution; the
    decomposition infima report the dense-grid value at the optimum of a
    conic solve over an accumulating state set, so they approach the true
    value from above.
    """
    _check_scale(instance.ctx)
    if resolution < 8:
        raise DomainError("oracle resolution too small to be meaningful")
    if problem == "sup_state":
        if not instance.f.is_positive(tol=1e-8):
            raise DomainError("sup_state oracle needs a positive integrand")
        return _sup_state_value(instance.f.values, instance.ctx, instance.p, resolution)
    if problem == "pnorm":
        return _pnorm_search(instance, resolution)
    if problem == "dec":
        return _dec_search(instance, resolution)
    if problem == "smixed":
        q = instance.q if instance.q is not None else instance.p
        return _smixed_value(instance.f.values, instance.ctx, q, resolution)
    raise DomainError(f"unknown oracle problem {problem!r}")

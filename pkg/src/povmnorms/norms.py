"""User-facing norms, including the rejected candidates kept for comparison
experiments.

Variational norms return NormEstimate intervals; the scalar-formula norms
(essential sup, naive norm) return exact floats.  Positive and self-adjoint
fast paths run before any solver, and p = inf is routed to the essential-sup
norm rather than the variational machinery.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import linalg
from .errors import DomainError
from .optimize import (
    DEFAULT_CONFIG,
    NormEstimate,
    SolverConfig,
    _polyak_sweep,
    dykstra_two_cones,
    exact_estimate,
    inf_block_dec,
    inf_decomposition_pnorm,
    lift_to_cones,
    pure_sup,
    scalar_reduction_lower,
    sup_state_lp,
)
from .qrv import QRV, MeasureContext, integrate_ctx


@dataclass(frozen=True)
class NormId:
    """Parsed norm identifier; see :func:`parse_norm_id` for the grammar."""

    kind: str
    p: float | None = None
    q: float | None = None

    def __str__(self) -> str:
        if self.kind == "inf":
            return "inf"
        if self.kind == "smixed":
            return f"smixed:{_fmt(self.p)}:{_fmt(self.q)}"
        tag = {"p_norm": "p", "dec": "dec", "naive": "naive", "cand": "cand"}[self.kind]
        return f"{tag}:{_fmt(self.p)}"


def _fmt(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else str(x)


def _parse_exponent(token: str, where: str) -> float:
    try:
        val = float(token)
    except ValueError as exc:
        raise DomainError(f"bad exponent {token!r} in {where}") from exc
    if not (val >= 1):
        raise DomainError(f"exponent must be >= 1 in {where}")
    return val


def parse_norm_id(text: str) -> NormId:
    """Parse the CLI norm grammar: ``p:2``, ``dec:2``, ``smixed:1:2``,
    ``inf``, ``naive:2``, ``cand:2``."""
    parts = text.strip().split(":")
    head = parts[0]
    if head == "inf":
        if len(parts) != 1:
            raise DomainError(f"'inf' takes no exponent, got {text!r}")
        return NormId("inf")
    if head == "smixed":
        if len(parts) != 3:
            raise DomainError(f"'smixed' needs two exponents, got {text!r}")
        return NormId("smixed", _parse_exponent(parts[1], text), _parse_exponent(parts[2], text))
    kinds = {"p": "p_norm", "dec": "dec", "naive": "naive", "cand": "cand"}
    if head not in kinds or len(parts) != 2:
        raise DomainError(f"unrecognized norm id {text!r}")
    return NormId(kinds[head], _parse_exponent(parts[1], text))


# ---------------------------------------------------------------------------


def inf_norm(f: QRV, ctx: MeasureContext) -> float:
    """Least upper essential bound: max ||f(x)|| over positive-weight atoms."""
    norms = f.op_norms()
    vals = [n for n, w in zip(norms, ctx.weights) if w > 0]
    return float(max(vals)) if vals else 0.0


def p_norm(f: QRV, p: float, ctx: MeasureContext, cfg: SolverConfig | None = None) -> NormEstimate:
    """The decomposition p-norm of f (1-norm homogeneous seminorm)."""
    if np.isinf(p):
        return exact_estimate(inf_norm(f, ctx), "pnorm:essential-sup")
    if p < 1:
        raise DomainError(f"p-norm requires p >= 1, got {p}")
    return inf_decomposition_pnorm(f, float(p), ctx, cfg or DEFAULT_CONFIG)


def one_norm(f: QRV, ctx: MeasureContext, cfg: SolverConfig | None = None) -> NormEstimate:
    """The 1-norm, cross-checked against the operator-norm-of-integral form.

    The p = 1 solver value and an independent minimization of
    ||integral of (f1+f2+f3+f4)|| must agree; their intersection is returned.
    """
    cfg = cfg or DEFAULT_CONFIG
    main = p_norm(f, 1.0, ctx, cfg)
    alt = _one_norm_integral(f, ctx, cfg)
    tol = 1e-6 + 5e-3 * (1.0 + max(main.upper, alt.upper))
    if main.lower > alt.upper + tol or alt.lower > main.upper + tol:
        raise RuntimeError(
            f"one-norm formulations disagree: [{main.lower}, {main.upper}] vs [{alt.lower}, {alt.upper}]"
        )
    lower = max(main.lower, alt.lower)
    upper = min(main.upper, alt.upper)
    lower = min(lower, upper)
    return NormEstimate(lower=lower, upper=upper, method="one-norm:crosschecked",
                        iterations=main.iterations + alt.iterations)


def _one_norm_integral(f: QRV, ctx: MeasureContext, cfg: SolverConfig) -> NormEstimate:
    """Direct bracket of inf ||int (f1+f2+f3+f4) dnu|| over decompositions."""
    if ctx.dim == 1:
        d_scalar = ctx.derivs[:, 0, 0].real
        vals = f.values[:, 0, 0]
        g = np.abs(vals.real) + np.abs(vals.imag)
        return exact_estimate(float(np.sum(ctx.weights * d_scalar * g)), "one-norm:scalar")
    if f.is_positive(tol=1e-9):
        val = linalg.spectral_norm(integrate_ctx(f, ctx))
        return exact_estimate(val, "one-norm:positive")

    re_f = (f.values + np.conj(np.swapaxes(f.values, -1, -2))) / 2
    im_f = (f.values - np.conj(np.swapaxes(f.values, -1, -2))) / 2j
    branches = [b for b in (re_f, im_f) if np.max(np.abs(b)) > 1e-13]
    if not branches:
        return exact_estimate(0.0, "one-norm:zero")
    m, d = len(ctx.space), ctx.dim
    shifts = np.concatenate(branches, axis=0)
    n_br = len(branches)
    w = ctx.weights
    sq = ctx.sqrt_derivs

    def g_of(y):
        g = -np.sum(shifts.reshape(n_br, m, d, d), axis=0)
        return g + 2.0 * np.sum(y.reshape(n_br, m, d, d), axis=0)

    def eval_fn(y):
        gint = np.einsum("m,mik,mkl,mlj->ij", w, sq, g_of(y), sq)
        vals, vecs = np.linalg.eigh(linalg.hermitianize(gint))
        val = max(float(vals[-1]), 0.0)
        top = vecs[:, -1]
        t = np.einsum("mik,k,l,mlj->mij", sq, top, top.conj(), sq)
        t = (t + np.conj(np.swapaxes(t, -1, -2))) / 2
        grad = 2.0 * np.tile(np.einsum("m,mij->mij", w, t), (n_br, 1, 1))
        return val, [grad]

    def step_fn(y, step, grad):
        return dykstra_two_cones(y - step * grad[0], shifts, 4)

    y0 = dykstra_two_cones(
        np.concatenate([linalg.batched_clamp_psd(b) for b in branches], axis=0),
        shifts,
        cfg.dykstra_sweeps,
    )
    y, j_best, its = _polyak_sweep(eval_fn, step_fn, y0, cfg)
    y = lift_to_cones(dykstra_two_cones(y, shifts, cfg.dykstra_sweeps), shifts)
    upper = float(linalg.spectral_norm(integrate_ctx(QRV(f.space, g_of(y), d), ctx)))
    reduction = scalar_reduction_lower(f, 1.0, ctx, cfg)
    lower = min(reduction.lower, upper)
    return NormEstimate(lower=lower, upper=upper, method="one-norm:integral", iterations=its)


def dec_p_norm(f: QRV, p: float, ctx: MeasureContext, cfg: SolverConfig | None = None) -> NormEstimate:
    """The decomposable p-norm (Euclidean homogeneous seminorm)."""
    if np.isinf(p):
        return exact_estimate(inf_norm(f, ctx), "dec:essential-sup")
    if p < 1:
        raise DomainError(f"dec norm requires p >= 1, got {p}")
    cfg = cfg or DEFAULT_CONFIG
    if f.is_hermitian(tol=1e-9) and cfg.use_selfadjoint_shortcut:
        est = p_norm(f, p, ctx, cfg)
        return replace(est, method="dec:selfadjoint=pnorm," + est.method)
    est = inf_block_dec(f, float(p), ctx, cfg)
    polar = _polar_upper(f, p, ctx, cfg)
    if polar < est.upper:
        est = replace(est, upper=max(polar, est.lower), method=est.method + "+polar-cap")
    return est


def _polar_upper(f: QRV, p: float, ctx: MeasureContext, cfg: SolverConfig) -> float:
    """max(|| |f| ||_p, || |f*| ||_p): a certified upper bound for the dec norm."""
    sub = cfg.reduced()
    a = sup_state_lp(f.abs(), p, ctx, sub)
    b = sup_state_lp(f.abs_star(), p, ctx, sub)
    return max(a.upper, b.upper)


def schatten_mixed(f: QRV, p: float, q: float, ctx: MeasureContext,
                   cfg: SolverConfig | None = None, extra_starts=None) -> NormEstimate:
    """Schatten-mixed seminorm over pure states.

    On a pure state the sandwiched operator has rank one, so the Schatten
    exponent p does not affect the value; the estimate is the supremum of the
    weighted L^q norm of |<psi| D^{1/2} f D^{1/2} |psi>|.
    """
    if p < 1 or q < 1 or np.isinf(q):
        raise DomainError("schatten_mixed requires p >= 1 and finite q >= 1")
    cfg = cfg or DEFAULT_CONFIG
    mats = ctx.pair_matrices(f)
    est = pure_sup("abs", ctx.weights, float(q), mats, ctx.dim, cfg, extra_starts=extra_starts)
    return replace(est, method=f"smixed(p={_fmt(p)}):" + est.method)


def naive_norm(f: QRV, p: float, ctx: MeasureContext) -> float:
    """|| int ||f(x)||^p I dnu ||^{1/p}: the structure-ignoring comparison norm."""
    if np.isinf(p):
        return inf_norm(f, ctx)
    if p < 1:
        raise DomainError(f"naive norm requires p >= 1, got {p}")
    norms = f.op_norms()
    total = np.einsum("m,mij->ij", ctx.weights * norms**p, ctx.derivs)
    val = linalg.spectral_norm(total)
    return float(val ** (1.0 / p)) if val > 0 else 0.0


def candidate_norm(f: QRV, p: float, ctx: MeasureContext, cfg: SolverConfig | None = None) -> NormEstimate:
    """The rejected candidate inf ||int (sum f_i)^p dnu||^{1/p}.

    Coincides with the 1-norm at p = 1.  The upper endpoint is the exact
    objective at the best feasible decomposition found (descent is global for
    p <= 2 where the trace power is operator convex, local beyond); the lower
    endpoint is a Jensen-trace convex relaxation, sound for every p >= 1.
    """
    cfg = cfg or DEFAULT_CONFIG
    if np.isinf(p):
        raise DomainError("candidate norm requires finite p")
    if p < 1:
        raise DomainError(f"candidate norm requires p >= 1, got {p}")
    p = float(p)
    if p == 1.0:
        est = one_norm(f, ctx, cfg)
        return replace(est, method="cand:p1=" + est.method)

    effects = np.einsum("m,mij->mij", ctx.weights, ctx.derivs)
    sqrt_eff = np.einsum("m,mij->mij", np.sqrt(ctx.weights), ctx.sqrt_derivs)

    def objective(g_vals: np.ndarray) -> float:
        acc = np.zeros((ctx.dim, ctx.dim), dtype=np.complex128)
        for ke, g in zip(sqrt_eff, g_vals):
            acc += ke @ linalg.matrix_power(g, p) @ ke
        val = linalg.spectral_norm(acc)
        return float(val ** (1.0 / p)) if val > 0 else 0.0

    if ctx.dim == 1:
        vals = f.values[:, 0, 0]
        g = np.abs(vals.real) + np.abs(vals.imag)
        nu_scalar = effects[:, 0, 0].real
        total = float(np.sum(nu_scalar * g**p))
        return exact_estimate(total ** (1.0 / p) if total > 0 else 0.0, "cand:scalar-exact")

    if f.is_positive(tol=1e-9):
        return exact_estimate(objective(f.values), "cand:positive-shortcut")

    re_f = (f.values + np.conj(np.swapaxes(f.values, -1, -2))) / 2
    im_f = (f.values - np.conj(np.swapaxes(f.values, -1, -2))) / 2j
    branches = [b for b in (re_f, im_f) if np.max(np.abs(b)) > 1e-13]
    if not branches:
        return exact_estimate(0.0, "cand:zero")
    m, d = len(ctx.space), ctx.dim
    shifts = np.concatenate(branches, axis=0)
    n_br = len(branches)

    def g_of(y):
        g = -np.sum(shifts.reshape(n_br, m, d, d), axis=0)
        return g + 2.0 * np.sum(y.reshape(n_br, m, d, d), axis=0)

    def eval_fn(y):
        g_vals = linalg.batched_clamp_psd(g_of(y))
        acc = np.zeros((d, d), dtype=np.complex128)
        powered = []
        for ke, g in zip(sqrt_eff, g_vals):
            gp = linalg.matrix_power(g, p)
            powered.append(gp)
            acc += ke @ gp @ ke
        vals, vecs = np.linalg.eigh(linalg.hermitianize(acc))
        lam = max(float(vals[-1]), 0.0)
        if lam <= 0:
            return 0.0, [np.zeros_like(y)]
        top = vecs[:, -1]
        grad_g = np.stack([
            _trace_power_frechet(ke @ np.outer(top, top.conj()) @ ke, g, p)
            for ke, g in zip(sqrt_eff, g_vals)
        ])
        scale = (1.0 / p) * lam ** (1.0 / p - 1.0)
        grad = 2.0 * scale * np.tile(grad_g, (n_br, 1, 1))
        return lam ** (1.0 / p), [grad]

    def step_fn(y, step, grad):
        return dykstra_two_cones(y - step * grad[0], shifts, 4)

    y0 = dykstra_two_cones(
        np.concatenate([linalg.batched_clamp_psd(b) for b in branches], axis=0),
        shifts,
        cfg.dykstra_sweeps,
    )
    y, j_best, its = _polyak_sweep(eval_fn, step_fn, y0, cfg)
    y = lift_to_cones(dykstra_two_cones(y, shifts, cfg.dykstra_sweeps), shifts)
    upper = objective(g_of(y))

    n_mats = np.einsum("mik,mkl,mlj->mij", sqrt_eff, f.values, sqrt_eff)
    jensen = pure_sup("cand", ctx.weights, p, n_mats, ctx.dim, cfg, tau_mats=effects)
    lower = min(jensen.lower, upper)
    method = "cand:descent+jensen" if p <= 2 else "cand:local-descent+jensen"
    return NormEstimate(lower=lower, upper=upper, method=method, iterations=its + jensen.iterations)


def _trace_power_frechet(weight: np.ndarray, g: np.ndarray, p: float) -> np.ndarray:
    """Gradient of g -> tr(W g^p) for Hermitian PSD g (Daleckii-Krein)."""
    w, u = np.linalg.eigh(linalg.hermitianize(g))
    w = np.maximum(w, 0.0)
    fw = w**p
    denom = w[:, None] - w[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        dd = np.where(np.abs(denom) > 1e-12, (fw[:, None] - fw[None, :]) / denom, 0.0)
    deriv = p * np.where(w > 0, w ** (p - 1.0), 0.0)
    eye = np.eye(len(w), dtype=bool)
    dd[eye] = deriv
    near = (np.abs(denom) <= 1e-12) & ~eye
    if np.any(near):
        avg = (deriv[:, None] + deriv[None, :]) / 2
        dd = np.where(near, avg, dd)
    wt = u.conj().T @ ((weight + weight.conj().T) / 2) @ u
    grad = u @ (wt * dd.T) @ u.conj().T
    return linalg.hermitianize(grad)


# ---------------------------------------------------------------------------


def compute_norm(norm_id: NormId, f: QRV, ctx: MeasureContext, cfg: SolverConfig | None = None):
    """Dispatch a parsed NormId; returns a NormEstimate or a float."""
    if norm_id.kind == "inf":
        return inf_norm(f, ctx)
    if norm_id.kind == "p_norm":
        return p_norm(f, norm_id.p, ctx, cfg)
    if norm_id.kind == "dec":
        return dec_p_norm(f, norm_id.p, ctx, cfg)
    if norm_id.kind == "smixed":
        return schatten_mixed(f, norm_id.p, norm_id.q, ctx, cfg)
    if norm_id.kind == "naive":
        return naive_norm(f, norm_id.p, ctx)
    if norm_id.kind == "cand":
        return candidate_norm(f, norm_id.p, ctx, cfg)
    raise DomainError(f"unknown norm id {norm_id}")

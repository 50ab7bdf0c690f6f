"""Randomized property suites, one per proved statement of the theory.

Every inequality verdict pairs the conservative endpoints (lhs lower vs rhs
upper) so bracket error can never manufacture a violation of a proved
result: a red run indicates a library bug, not a mathematical discovery.
Trials draw their generator stream from (seed, trial index), so parallel and
serial runs agree; witnesses are the serialized instances themselves and
re-evaluate through the same code path used by the suite.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass

import numpy as np

from . import io as pio
from .errors import DomainError
from .generators import (
    random_commuting_positive_pair,
    random_hermitian_qrv,
    random_povm,
    random_qrv,
    random_state,
    trial_rng,
)
from .norms import dec_p_norm, naive_norm, p_norm, schatten_mixed
from .optimize import DEFAULT_CONFIG, SolverConfig
from .oracle import OracleInstance, brute_force_oracle
from .qrv import QRV, context
from .tensor import sep_norms

SUITE_IDS = (
    "seminorm_p",
    "seminorm_dec",
    "sandwich",
    "reim",
    "polar_bound",
    "schatten_chain",
    "holder_commuting",
    "holder_sandwich_corollary",
    "minkowski_commuting",
    "minkowski_corollary",
    "tensor_holder",
    "tensor_holder_dec",
    "multiplier",
    "schatten_holder",
    "cauchy_sanity",
)

_ORACLE_SUITES = {
    "seminorm_p", "seminorm_dec", "sandwich", "reim", "polar_bound",
    "schatten_chain", "holder_commuting",
}


@dataclass(frozen=True)
class VerifyReport:
    """Outcome of one randomized suite run."""

    suite: str
    trials: int
    violations: int
    worst_margin: float
    witnesses: tuple
    seed: int
    config: dict

    def to_json(self) -> dict:
        return {
            "suite": self.suite,
            "trials": self.trials,
            "violations": self.violations,
            "worst_margin": self.worst_margin,
            "witnesses": list(self.witnesses),
            "seed": self.seed,
            "config": self.config,
        }


# ---------------------------------------------------------------------------
# per-suite generators (JSON payloads) and margin checks
# ---------------------------------------------------------------------------


def _finite_holder(p_values) -> list[float]:
    out = [p for p in p_values if 1.0 < float(p) < np.inf]
    return out or [1.5, 2.0, 3.0]


def _gen_ctx(rng, dims, atoms, cap_dim=None):
    dim = int(rng.integers(1, dims + 1))
    if cap_dim is not None:
        dim = min(dim, cap_dim)
    n_atoms = int(rng.integers(1, atoms + 1))
    nu = random_povm(rng, dim, n_atoms)
    rho = random_state(rng, dim)
    return dim, n_atoms, nu, rho


def _encode_base(nu, rho):
    return {"povm": pio.encode_povm(nu), "rho": pio.encode_state(rho)}


def _decode_base(payload):
    nu = pio.decode_povm(payload["povm"])
    rho = pio.decode_state(payload["rho"])
    return context(nu, rho)


def _gen_seminorm_p(rng, dims, atoms, p_values):
    dim, n_atoms, nu, rho = _gen_ctx(rng, dims, atoms)
    lam = complex(rng.normal(), rng.normal())
    out = _encode_base(nu, rho)
    out.update(
        p=float(rng.choice(p_values)),
        f=pio.encode_qrv(random_qrv(rng, dim, n_atoms)),
        g=pio.encode_qrv(random_qrv(rng, dim, n_atoms)),
        scalar=[lam.real, lam.imag],
    )
    return out


def _check_seminorm_p(payload, cfg, tol):
    """Triangle inequality plus the provable scaling sandwich.

    The 1-norm homogeneity *equality* claimed for the p-norm fails for
    generic complex scalars (|.|_1 on C is not multiplicative; f = 1+i,
    lam = 1+i is a scalar counterexample), so the suite asserts what the
    proof actually gives: |lam|^2/|lam|_1 * ||f|| <= ||lam f|| <= |lam|_1 ||f||.
    """
    ctx = _decode_base(payload)
    p = payload["p"]
    f = pio.decode_qrv(payload["f"])
    g = pio.decode_qrv(payload["g"])
    lam = complex(*payload["scalar"])
    ef = p_norm(f, p, ctx, cfg)
    eg = p_norm(g, p, ctx, cfg)
    efg = p_norm(f + g, p, ctx, cfg)
    margins = [efg.lower - ef.upper - eg.upper]
    one_norm_lam = abs(lam.real) + abs(lam.imag)
    el = p_norm(f.scale(lam), p, ctx, cfg)
    margins.append(el.lower - one_norm_lam * ef.upper)
    if one_norm_lam > 0:
        margins.append((abs(lam) ** 2 / one_norm_lam) * ef.lower - el.upper)
    return max(margins)


def _gen_seminorm_dec(rng, dims, atoms, p_values):
    out = _gen_seminorm_p(rng, dims, atoms, p_values)
    return out


def _check_seminorm_dec(payload, cfg, tol):
    ctx = _decode_base(payload)
    p = payload["p"]
    f = pio.decode_qrv(payload["f"])
    g = pio.decode_qrv(payload["g"])
    lam = complex(*payload["scalar"])
    ef = dec_p_norm(f, p, ctx, cfg)
    eg = dec_p_norm(g, p, ctx, cfg)
    efg = dec_p_norm(f + g, p, ctx, cfg)
    margins = [efg.lower - ef.upper - eg.upper]
    el = dec_p_norm(f.scale(lam), p, ctx, cfg)
    margins.append(el.lower - abs(lam) * ef.upper)
    margins.append(abs(lam) * ef.lower - el.upper)
    estar = dec_p_norm(f.adjoint(), p, ctx, cfg)
    margins.append(estar.lower - ef.upper)
    margins.append(ef.lower - estar.upper)
    return max(margins)


def _gen_single_f(rng, dims, atoms, p_values):
    dim, n_atoms, nu, rho = _gen_ctx(rng, dims, atoms)
    out = _encode_base(nu, rho)
    out.update(p=float(rng.choice(p_values)), f=pio.encode_qrv(random_qrv(rng, dim, n_atoms)))
    return out


def _check_sandwich(payload, cfg, tol):
    ctx = _decode_base(payload)
    p = payload["p"]
    f = pio.decode_qrv(payload["f"])
    pn = p_norm(f, p, ctx, cfg)
    dec = dec_p_norm(f, p, ctx, cfg)
    return max(0.5 * pn.lower - dec.upper, dec.lower - 2.0 * pn.upper)


def _check_reim(payload, cfg, tol):
    ctx = _decode_base(payload)
    p = payload["p"]
    f = pio.decode_qrv(payload["f"])
    pn = p_norm(f, p, ctx, cfg)
    dec = dec_p_norm(f, p, ctx, cfg)
    margins = []
    for part in (f.re(), f.im()):
        margins.append(p_norm(part, p, ctx, cfg).lower - pn.upper)
        margins.append(dec_p_norm(part, p, ctx, cfg).lower - dec.upper)
    return max(margins)


def _check_polar_bound(payload, cfg, tol):
    ctx = _decode_base(payload)
    p = payload["p"]
    f = pio.decode_qrv(payload["f"])
    dec = dec_p_norm(f, p, ctx, cfg)
    cap = max(p_norm(f.abs(), p, ctx, cfg).upper, p_norm(f.abs_star(), p, ctx, cfg).upper)
    return dec.lower - cap


def _gen_schatten_chain(rng, dims, atoms, p_values):
    dim, n_atoms, nu, rho = _gen_ctx(rng, dims, atoms)
    ps = sorted({float(p) for p in p_values if np.isfinite(p)})
    if len(ps) < 2:
        ps = [1.0, 2.0]
    lo, hi = ps[0], ps[-1]
    out = _encode_base(nu, rho)
    out.update(
        q=float(rng.choice([p for p in p_values if np.isfinite(p)])),
        p_small=lo,
        p_large=hi,
        f=pio.encode_qrv(random_qrv(rng, dim, n_atoms)),
    )
    return out


def _check_schatten_chain(payload, cfg, tol):
    ctx = _decode_base(payload)
    f = pio.decode_qrv(payload["f"])
    q = payload["q"]
    sm_large = schatten_mixed(f, payload["p_large"], q, ctx, cfg)
    extra = [sm_large.witness] if sm_large.witness is not None else None
    sm_small = schatten_mixed(f, payload["p_small"], q, ctx, cfg, extra_starts=extra)
    margins = [sm_large.lower - sm_small.upper]
    sm_one = schatten_mixed(f, 1.0, q, ctx, cfg, extra_starts=extra)
    pn = p_norm(f, q, ctx, cfg)
    margins.append(sm_one.lower - pn.upper)
    return max(margins)


def _gen_commuting_pair(rng, dims, atoms, p_values):
    dim, n_atoms, nu, rho = _gen_ctx(rng, dims, atoms)
    f, g = random_commuting_positive_pair(rng, dim, n_atoms)
    out = _encode_base(nu, rho)
    out.update(
        p=float(rng.choice(_finite_holder(p_values))),
        f=pio.encode_qrv(f),
        g=pio.encode_qrv(g),
    )
    return out


def _check_holder_commuting(payload, cfg, tol):
    ctx = _decode_base(payload)
    p = payload["p"]
    q = p / (p - 1.0)
    f = pio.decode_qrv(payload["f"])
    g = pio.decode_qrv(payload["g"])
    lhs = p_norm(f.pointwise_mul(g), 1.0, ctx, cfg)
    rf = p_norm(f.pointwise_power(p), 1.0, ctx, cfg)
    rg = p_norm(g.pointwise_power(q), 1.0, ctx, cfg)
    rhs = rf.upper ** (1.0 / p) * rg.upper ** (1.0 / q)
    return lhs.lower - rhs


def _gen_positive_pair(rng, dims, atoms, p_values):
    dim, n_atoms, nu, rho = _gen_ctx(rng, dims, atoms)
    out = _encode_base(nu, rho)
    from .generators import random_positive_qrv

    out.update(
        p=float(rng.choice(_finite_holder(p_values))),
        f=pio.encode_qrv(random_positive_qrv(rng, dim, n_atoms)),
        g=pio.encode_qrv(random_positive_qrv(rng, dim, n_atoms)),
    )
    return out


def _check_holder_sandwich(payload, cfg, tol):
    ctx = _decode_base(payload)
    p = payload["p"]
    q = p / (p - 1.0)
    f = pio.decode_qrv(payload["f"])
    g = pio.decode_qrv(payload["g"])
    g_half = g.pointwise_power(0.5)
    mid = g_half.pointwise_mul(f).pointwise_mul(g_half)
    lhs = p_norm(mid, 1.0, ctx, cfg)
    rhs = naive_norm(f, p, ctx) * p_norm(g.pointwise_power(q), 1.0, ctx, cfg).upper ** (1.0 / q)
    return lhs.lower - rhs


def _check_minkowski_commuting(payload, cfg, tol):
    ctx = _decode_base(payload)
    p = payload["p"]
    f = pio.decode_qrv(payload["f"])
    g = pio.decode_qrv(payload["g"])
    lhs = p_norm((f + g).pointwise_power(p), 1.0, ctx, cfg).lower ** (1.0 / p)
    rf = p_norm(f.pointwise_power(p), 1.0, ctx, cfg).upper ** (1.0 / p)
    rg = p_norm(g.pointwise_power(p), 1.0, ctx, cfg).upper ** (1.0 / p)
    return lhs - rf - rg


def _check_minkowski_corollary(payload, cfg, tol):
    ctx = _decode_base(payload)
    p = payload["p"]
    f = pio.decode_qrv(payload["f"])
    g = pio.decode_qrv(payload["g"])
    lhs = p_norm((f + g).pointwise_power(p), 1.0, ctx, cfg).lower ** (1.0 / p)
    return lhs - naive_norm(f, p, ctx) - naive_norm(g, p, ctx)


def _gen_tensor(rng, dims, atoms, p_values):
    dim, n_atoms, nu, rho = _gen_ctx(rng, dims, atoms, cap_dim=2)
    out = _encode_base(nu, rho)
    out.update(
        p=float(rng.choice(_finite_holder(p_values))),
        f=pio.encode_qrv(random_qrv(rng, dim, n_atoms)),
        g=pio.encode_qrv(random_qrv(rng, dim, n_atoms)),
    )
    return out


def _gen_general_pair(rng, dims, atoms, p_values):
    dim, n_atoms, nu, rho = _gen_ctx(rng, dims, atoms)
    out = _encode_base(nu, rho)
    out.update(
        p=float(rng.choice(_finite_holder(p_values))),
        f=pio.encode_qrv(random_qrv(rng, dim, n_atoms)),
        g=pio.encode_qrv(random_qrv(rng, dim, n_atoms)),
    )
    return out


def _check_tensor_holder(payload, cfg, tol, mode="sep_1"):
    ctx = _decode_base(payload)
    p = payload["p"]
    q = p / (p - 1.0)
    f = pio.decode_qrv(payload["f"])
    g = pio.decode_qrv(payload["g"])
    out = sep_norms(f, g, p, q, mode, ctx, cfg, tol=tol)
    return out.margin


def _check_multiplier(payload, cfg, tol):
    ctx = _decode_base(payload)
    f = pio.decode_qrv(payload["f"])
    g = pio.decode_qrv(payload["g"])
    out = sep_norms(f, g, 1.0, np.inf, "multiplier", ctx, cfg, tol=tol)
    return max(out.margin, out.extras["margin_dec"])


def _check_schatten_holder(payload, cfg, tol):
    ctx = _decode_base(payload)
    p = payload["p"]
    q = p / (p - 1.0)
    f = pio.decode_qrv(payload["f"])
    g = pio.decode_qrv(payload["g"])
    sm_f = schatten_mixed(f, p, p, ctx, cfg)
    sm_g = schatten_mixed(g, q, q, ctx, cfg)
    nf = ctx.pair_matrices(f)
    ng = ctx.pair_matrices(g)
    cands = [w for w in (sm_f.witness, sm_g.witness) if w is not None]
    rng = np.random.default_rng(cfg.seed + 23)
    for _ in range(16):
        v = rng.normal(size=ctx.dim) + 1j * rng.normal(size=ctx.dim)
        cands.append(v / np.linalg.norm(v))
    lhs_lower = 0.0
    for psi in cands:
        zf = np.einsum("i,mij,j->m", psi.conj(), nf, psi)
        zg = np.einsum("i,mij,j->m", psi.conj(), ng, psi)
        lhs_lower = max(lhs_lower, float(np.sum(ctx.weights * np.abs(zf * zg))))
    return lhs_lower - sm_f.upper * sm_g.upper


def _gen_cauchy(rng, dims, atoms, p_values):
    dim = min(max(dims, 1), 2)
    n_atoms = int(rng.integers(1, atoms + 1))
    nu = random_povm(rng, dim, n_atoms)
    rho = random_state(rng, dim)
    out = _encode_base(nu, rho)
    out.update(
        p=2.0,
        depth=8,
        increments=[pio.encode_qrv(random_qrv(rng, dim, n_atoms)) for _ in range(10)],
    )
    return out


def _check_cauchy(payload, cfg, tol):
    """Telescoping completeness construction: increments are normalized to
    ||delta_n||_p <= 0.9 * 2^{-(n+1)}, so the limit g = sum delta_n satisfies
    ||g - f_{k_m}||_p < 2^{1-m}; the margin compares the bracket upper."""
    ctx = _decode_base(payload)
    p = payload["p"]
    deltas = []
    for n, enc in enumerate(payload["increments"]):
        u = pio.decode_qrv(enc)
        up = p_norm(u, p, ctx, cfg).upper
        scale = 0.9 * 2.0 ** (-(n + 1)) / max(up, 1e-12)
        deltas.append(u.scale(scale))
    total = deltas[0]
    for d in deltas[1:]:
        total = total + d
    margins = []
    partial = None
    for m in range(1, payload["depth"] + 1):
        partial = deltas[0] if partial is None else partial + deltas[m - 1]
        tail = total - partial
        up = p_norm(tail, p, ctx, cfg).upper
        margins.append(up - 2.0 ** (1 - m))
    return max(margins)


_SUITES = {
    "seminorm_p": (_gen_seminorm_p, _check_seminorm_p),
    "seminorm_dec": (_gen_seminorm_dec, _check_seminorm_dec),
    "sandwich": (_gen_single_f, _check_sandwich),
    "reim": (_gen_single_f, _check_reim),
    "polar_bound": (_gen_single_f, _check_polar_bound),
    "schatten_chain": (_gen_schatten_chain, _check_schatten_chain),
    "holder_commuting": (_gen_commuting_pair, _check_holder_commuting),
    "holder_sandwich_corollary": (_gen_positive_pair, _check_holder_sandwich),
    "minkowski_commuting": (_gen_commuting_pair, _check_minkowski_commuting),
    "minkowski_corollary": (_gen_positive_pair, _check_minkowski_corollary),
    "tensor_holder": (_gen_tensor, lambda pl, c, t: _check_tensor_holder(pl, c, t, "sep_1")),
    "tensor_holder_dec": (_gen_tensor, lambda pl, c, t: _check_tensor_holder(pl, c, t, "sep_dec")),
    "multiplier": (_gen_tensor, _check_multiplier),
    "schatten_holder": (_gen_general_pair, _check_schatten_holder),
    "cauchy_sanity": (_gen_cauchy, _check_cauchy),
}


def _oracle_crosscheck(payload, cfg):
    """Compare solver brackets against the brute-force oracle on small trials.

    Disagreement beyond the combined tolerance is a library bug and fails the
    whole run (RuntimeError), per the suite contract.
    """
    f = pio.decode_qrv(payload["f"])
    ctx = _decode_base(payload)
    if ctx.dim > 2 or len(ctx.space) > 3:
        return
    p = float(payload.get("p", payload.get("q", 2.0)))
    if not np.isfinite(p):
        return
    checks = [
        ("pnorm", p_norm(f, p, ctx, cfg)),
        ("dec", dec_p_norm(f, p, ctx, cfg)),
    ]
    for problem, est in checks:
        grid = brute_force_oracle(problem, OracleInstance(f, p, ctx), resolution=16)
        slack = 8e-3 * (1.0 + est.upper)
        if not (est.lower - slack <= grid <= est.upper + slack):
            raise RuntimeError(
                f"oracle cross-check failed for {problem}: grid={grid} "
                f"bracket=[{est.lower}, {est.upper}]"
            )


def re_evaluate(witness: dict, cfg: SolverConfig | None = None) -> float:
    """Recompute a witness margin from its serialized form."""
    suite = witness.get("suite")
    if suite not in _SUITES:
        raise DomainError(f"unknown suite {suite!r}")
    tol = float(witness.get("tol", 1e-2))
    return _SUITES[suite][1](witness, cfg or DEFAULT_CONFIG, tol)


def _run_trial(args):
    (suite, seed, idx, dims, atoms, p_values, tol, cfg, oracle_check) = args
    gen, check = _SUITES[suite]
    rng = trial_rng(seed, idx)
    payload = gen(rng, dims, atoms, p_values)
    payload["suite"] = suite
    payload["trial"] = idx
    payload["tol"] = tol
    margin = float(check(payload, cfg, tol))
    if oracle_check and suite in _ORACLE_SUITES and "f" in payload:
        _oracle_crosscheck(payload, cfg)
    witness = None
    if margin > tol:
        witness = dict(payload)
        witness["margin"] = margin
    return idx, margin, witness


def run_suite(
    suite: str,
    trials: int = 300,
    dims: int = 3,
    atoms: int = 4,
    seed: int = 0,
    p_values=(1.0, 1.5, 2.0, 3.0),
    tol: float = 1e-2,
    workers: int = 1,
    oracle_check: bool = True,
    cfg: SolverConfig | None = None,
) -> VerifyReport:
    """Run one randomized suite and collect margins and witnesses.

    A witness is recorded whenever the conservative margin exceeds ``tol``;
    the worst margin is reported either way (negative margins measure slack).
    """
    if suite not in _SUITES:
        raise DomainError(f"unknown suite {suite!r}; known: {', '.join(SUITE_IDS)}")
    if trials < 1 or dims < 1 or atoms < 1:
        raise DomainError("trials, dims and atoms must be positive")
    cfg = cfg or DEFAULT_CONFIG
    args = [
        (suite, seed, idx, dims, atoms, tuple(float(p) for p in p_values), tol, cfg, oracle_check)
        for idx in range(trials)
    ]
    results = []
    if workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            for out in pool.map(_run_trial, args, chunksize=4):
                results.append(out)
    else:
        results = [_run_trial(a) for a in args]
    results.sort(key=lambda t: t[0])
    margins = [m for _, m, _ in results]
    witnesses = tuple(w for _, _, w in results if w is not None)
    return VerifyReport(
        suite=suite,
        trials=trials,
        violations=len(witnesses),
        worst_margin=float(np.max(margins)),
        witnesses=witnesses,
        seed=seed,
        config={
            "dims": dims,
            "atoms": atoms,
            "p_values": [float(p) for p in p_values],
            "tol": tol,
            "workers": workers,
            "oracle_check": oracle_check,
            "solver": {
                "max_iters": cfg.max_iters,
                "restarts": cfg.restarts,
                "rounds": cfg.rounds,
                "grid_resolution": cfg.grid_resolution,
                "seed": cfg.seed,
            },
        },
    )

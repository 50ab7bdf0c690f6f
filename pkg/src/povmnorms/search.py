"""Counterexample search for the two open questions of the theory.

candidate_triangle(p): hunt for f, g with
    cand(f+g).lower > cand(f).upper + cand(g).upper + margin,
certifying only when the margin exceeds ten times the total bracket width,
so numerics noise is never reported as mathematics.  p = 2 is refused (the
candidate is a norm there); p = 1 is allowed as an integrity run where the
triangle inequality is proved and the search must come back exhausted.

pnorm_vs_s1lp_comparability(p): sweep dimensions and atom counts, recording
the ratio ||f||_p / ||f||_{S^1,L^p} trajectory.  The sweep grid is a guess
(the theory gives no hint where non-comparability would live); the result is
an observation, never a proof.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import io as pio
from .errors import DomainError
from .generators import random_povm, random_qrv, random_state, trial_rng
from .norms import candidate_norm, p_norm, schatten_mixed
from .optimize import DEFAULT_CONFIG, SolverConfig
from .qrv import QRV, context

CONJECTURES = ("candidate_triangle", "pnorm_vs_s1lp_comparability")


@dataclass(frozen=True)
class SearchResult:
    conjecture: str
    p: float
    found: bool
    witness: dict | None
    trials_run: int
    budget: int
    best_score: float
    trajectory: tuple
    seed: int

    def to_json(self) -> dict:
        return {
            "conjecture": self.conjecture,
            "p": self.p,
            "found": self.found,
            "witness": self.witness,
            "trials_run": self.trials_run,
            "budget": self.budget,
            "best_score": self.best_score,
            "trajectory": list(self.trajectory),
            "seed": self.seed,
        }


def _triangle_score(f: QRV, g: QRV, p: float, ctx, cfg):
    ef = candidate_norm(f, p, ctx, cfg)
    eg = candidate_norm(g, p, ctx, cfg)
    efg = candidate_norm(f + g, p, ctx, cfg)
    score = efg.lower - ef.upper - eg.upper
    widths = ef.width + eg.width + efg.width
    return score, widths, (ef, eg, efg)


def verify_triangle_witness(witness: dict, cfg: SolverConfig | None = None):
    """Re-evaluate a serialized candidate-triangle witness from scratch."""
    cfg = cfg or DEFAULT_CONFIG
    nu = pio.decode_povm(witness["povm"])
    rho = pio.decode_state(witness["rho"])
    ctx = context(nu, rho)
    f = pio.decode_qrv(witness["f"])
    g = pio.decode_qrv(witness["g"])
    p = float(witness["p"])
    score, widths, _ = _triangle_score(f, g, p, ctx, cfg)
    certified = score > 0 and score >= 10.0 * widths
    return score, widths, certified


def _search_triangle(p: float, budget: int, seed: int, cfg: SolverConfig,
                     dims: int, atoms: int) -> SearchResult:
    if abs(p - 2.0) < 1e-12:
        raise DomainError(
            "candidate_triangle at p = 2 is rejected: the triangle inequality is proved there"
        )
    best_score = -np.inf
    trials = 0
    witness = None
    while trials < budget and witness is None:
        rng = trial_rng(seed, trials)
        dim = int(rng.integers(1, dims + 1))
        n_atoms = int(rng.integers(1, atoms + 1))
        nu = random_povm(rng, dim, n_atoms)
        rho = random_state(rng, dim)
        ctx = context(nu, rho)
        f = random_qrv(rng, dim, n_atoms)
        g = random_qrv(rng, dim, n_atoms)
        score, widths, _ = _triangle_score(f, g, p, ctx, cfg)
        trials += 1
        best_score = max(best_score, score - 10.0 * widths)

        # local refinement: multiplicative perturbations around promising pairs
        promising = score > -2.0 * widths
        for _ in range(6 if promising else 0):
            if trials >= budget:
                break
            pert_f = QRV(f.space, f.values * (1.0 + 0.15 * rng.normal(size=f.values.shape)), f.dim)
            pert_g = QRV(g.space, g.values * (1.0 + 0.15 * rng.normal(size=g.values.shape)), g.dim)
            s2, w2, _ = _triangle_score(pert_f, pert_g, p, ctx, cfg)
            trials += 1
            best_score = max(best_score, s2 - 10.0 * w2)
            if s2 > score:
                f, g, score, widths = pert_f, pert_g, s2, w2

        if score > 0 and score >= 10.0 * widths:
            candidate = {
                "conjecture": "candidate_triangle",
                "p": p,
                "povm": pio.encode_povm(nu),
                "rho": pio.encode_state(rho),
                "f": pio.encode_qrv(f),
                "g": pio.encode_qrv(g),
                "score": score,
                "widths": widths,
            }
            re_score, re_widths, certified = verify_triangle_witness(candidate, cfg)
            if certified:
                candidate["recheck_score"] = re_score
                candidate["recheck_widths"] = re_widths
                witness = candidate
    return SearchResult(
        conjecture="candidate_triangle",
        p=p,
        found=witness is not None,
        witness=witness,
        trials_run=trials,
        budget=budget,
        best_score=float(best_score) if np.isfinite(best_score) else 0.0,
        trajectory=(),
        seed=seed,
    )


def _search_comparability(p: float, budget: int, seed: int, cfg: SolverConfig,
                          dims: int, atoms: int) -> SearchResult:
    dim_grid = [d for d in (1, 2, 3) if d <= max(dims, 1)] or [1]
    atom_grid = [a for a in (1, 2, 4, 6) if a <= max(atoms, 1)] or [1]
    cells = [(d, a) for d in dim_grid for a in atom_grid]
    per_cell = max(budget // max(len(cells), 1), 1) if budget > 0 else 0
    trajectory = []
    best = 0.0
    trials = 0
    for d, a in cells:
        if trials >= budget:
            break
        ratios = []
        for k in range(per_cell):
            if trials >= budget:
                break
            rng = trial_rng(seed, trials)
            nu = random_povm(rng, d, a)
            rho = random_state(rng, d)
            ctx = context(nu, rho)
            f = random_qrv(rng, d, a)
            pn = p_norm(f, p, ctx, cfg)
            sm = schatten_mixed(f, 1.0, p, ctx, cfg)
            trials += 1
            if sm.upper > 1e-9:
                ratios.append(pn.lower / sm.upper)
        if ratios:
            cell_max = float(np.max(ratios))
            best = max(best, cell_max)
            trajectory.append({
                "dims": d,
                "atoms": a,
                "instances": len(ratios),
                "max_ratio": cell_max,
                "mean_ratio": float(np.mean(ratios)),
            })
    return SearchResult(
        conjecture="pnorm_vs_s1lp_comparability",
        p=p,
        found=False,
        witness=None,
        trials_run=trials,
        budget=budget,
        best_score=best,
        trajectory=tuple(trajectory),
        seed=seed,
    )


def search_counterexample(
    conjecture: str,
    p: float,
    budget: int,
    seed: int = 0,
    cfg: SolverConfig | None = None,
    dims: int = 3,
    atoms: int = 4,
) -> SearchResult:
    """Run one conjecture search; exhaustion is a legitimate outcome."""
    cfg = cfg or DEFAULT_CONFIG
    if budget < 0:
        raise DomainError("budget must be nonnegative")
    if p < 1 or np.isinf(p):
        raise DomainError("conjecture searches need finite p >= 1")
    if conjecture == "candidate_triangle":
        return _search_triangle(float(p), budget, seed, cfg, dims, atoms)
    if conjecture == "pnorm_vs_s1lp_comparability":
        return _search_comparability(float(p), budget, seed, cfg, dims, atoms)
    raise DomainError(f"unknown conjecture {conjecture!r}; known: {', '.join(CONJECTURES)}")

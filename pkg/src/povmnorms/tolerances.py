"""Default numerical tolerances.

All tolerances are absolute, scaled by (1 + ||A||_2) at the point of use, and
every public operation accepts a per-call override.  The environment variable
``OVLP_TOL_SCALE`` multiplies the defaults (useful for exploratory runs).
"""

import os

HERM_TOL = 1e-9
PSD_TOL = 1e-9
RANK_TOL = 1e-10
RECON_TOL = 1e-10
INTERVAL_TOL = 1e-9


def tol_scale() -> float:
    """Multiplier applied to default tolerances, from OVLP_TOL_SCALE."""
    raw = os.environ.get("OVLP_TOL_SCALE", "")
    if not raw:
        return 1.0
    try:
        scale = float(raw)
    except ValueError:
        return 1.0
    return scale if scale > 0 else 1.0


def herm_tol() -> float:
    return HERM_TOL * tol_scale()


def psd_tol() -> float:
    return PSD_TOL * tol_scale()


def rank_tol() -> float:
    return RANK_TOL * tol_scale()

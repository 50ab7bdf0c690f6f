"""JSON encoding/decoding for every externally visible object.

Matrices are encoded as {"dim": n, "entries": [[[re, im], ...], ...]}
row-major; decode errors carry the path of the offending element.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import FormatError
from .optimize import NormEstimate
from .povm import DensityOperator, DiscretePOVM, SampleSpace, ScalarMeasure, density, povm
from .qrv import QRV


def encode_matrix(m: np.ndarray) -> dict:
    m = np.asarray(m, dtype=np.complex128)
    return {
        "dim": int(m.shape[0]),
        "entries": [[[float(z.real), float(z.imag)] for z in row] for row in m],
    }


def decode_matrix(obj, path: str = "$") -> np.ndarray:
    if not isinstance(obj, dict):
        raise FormatError(path, "expected a matrix object")
    if "dim" not in obj or "entries" not in obj:
        raise FormatError(path, "matrix needs 'dim' and 'entries'")
    dim = obj["dim"]
    if not isinstance(dim, int) or dim < 1:
        raise FormatError(path + ".dim", "dim must be a positive integer")
    rows = obj["entries"]
    if not isinstance(rows, list) or len(rows) != dim:
        raise FormatError(path + ".entries", f"expected {dim} rows")
    out = np.zeros((dim, dim), dtype=np.complex128)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != dim:
            raise FormatError(f"{path}.entries[{i}]", f"expected {dim} columns")
        for j, cell in enumerate(row):
            if (not isinstance(cell, list)) or len(cell) != 2:
                raise FormatError(f"{path}.entries[{i}][{j}]", "expected [re, im]")
            try:
                out[i, j] = complex(float(cell[0]), float(cell[1]))
            except (TypeError, ValueError) as exc:
                raise FormatError(f"{path}.entries[{i}][{j}]", "non-numeric entry") from exc
    return out


def _decode_space(obj, path: str) -> SampleSpace:
    if not isinstance(obj, list) or not all(isinstance(a, str) for a in obj):
        raise FormatError(path, "space must be a list of atom labels")
    try:
        return SampleSpace(tuple(obj))
    except Exception as exc:
        raise FormatError(path, str(exc)) from exc


def encode_povm(nu: DiscretePOVM) -> dict:
    return {
        "space": list(nu.space.atoms),
        "dim": nu.dim,
        "effects": {a: encode_matrix(e) for a, e in zip(nu.space.atoms, nu.effects)},
    }


def decode_povm(obj, path: str = "$") -> DiscretePOVM:
    if not isinstance(obj, dict):
        raise FormatError(path, "expected a POVM object")
    sp = _decode_space(obj.get("space"), path + ".space")
    effects = obj.get("effects")
    if not isinstance(effects, dict):
        raise FormatError(path + ".effects", "expected a label -> matrix map")
    mats = {}
    for a in sp.atoms:
        if a not in effects:
            raise FormatError(f"{path}.effects.{a}", "missing effect")
        mats[a] = decode_matrix(effects[a], f"{path}.effects.{a}")
    try:
        return povm(sp, mats)
    except Exception as exc:
        raise FormatError(path, str(exc)) from exc


def encode_state(rho: DensityOperator) -> dict:
    out = encode_matrix(rho.matrix)
    out["role"] = "state"
    return out


def decode_state(obj, path: str = "$") -> DensityOperator:
    m = decode_matrix(obj, path)
    try:
        return density(m)
    except Exception as exc:
        raise FormatError(path, str(exc)) from exc


def encode_qrv(f: QRV) -> dict:
    return {
        "space": list(f.space.atoms),
        "dim": f.dim,
        "values": {a: encode_matrix(v) for a, v in zip(f.space.atoms, f.values)},
    }


def decode_qrv(obj, path: str = "$") -> QRV:
    if not isinstance(obj, dict):
        raise FormatError(path, "expected a QRV object")
    sp = _decode_space(obj.get("space"), path + ".space")
    values = obj.get("values")
    if not isinstance(values, dict):
        raise FormatError(path + ".values", "expected a label -> matrix map")
    mats = []
    for a in sp.atoms:
        if a not in values:
            raise FormatError(f"{path}.values.{a}", "missing value")
        mats.append(decode_matrix(values[a], f"{path}.values.{a}"))
    dims = {m.shape[0] for m in mats}
    if len(dims) != 1:
        raise FormatError(path + ".values", "values must share one dimension")
    return QRV(sp, np.stack(mats), mats[0].shape[0])


def encode_measure(mu: ScalarMeasure) -> dict:
    return {
        "space": list(mu.space.atoms),
        "weights": {a: float(w) for a, w in zip(mu.space.atoms, mu.weights)},
    }


def decode_measure(obj, path: str = "$") -> ScalarMeasure:
    if not isinstance(obj, dict):
        raise FormatError(path, "expected a scalar measure object")
    sp = _decode_space(obj.get("space"), path + ".space")
    weights = obj.get("weights")
    if not isinstance(weights, dict):
        raise FormatError(path + ".weights", "expected a label -> weight map")
    out = []
    for a in sp.atoms:
        if a not in weights:
            raise FormatError(f"{path}.weights.{a}", "missing weight")
        try:
            w = float(weights[a])
        except (TypeError, ValueError) as exc:
            raise FormatError(f"{path}.weights.{a}", "non-numeric weight") from exc
        if w < 0:
            raise FormatError(f"{path}.weights.{a}", "weights must be nonnegative")
        out.append(w)
    return ScalarMeasure(space=sp, weights=np.array(out))


def encode_estimate(est: NormEstimate) -> dict:
    out = {
        "lower": float(est.lower),
        "upper": float(est.upper),
        "method": est.method,
        "iterations": int(est.iterations),
    }
    if est.warning:
        out["warning"] = est.warning
    return out


def dumps(obj) -> str:
    """Deterministic JSON text (sorted keys, no trailing whitespace)."""
    return json.dumps(obj, sort_keys=True, separators=(",", ": "), indent=1)
